#include "memsyn/cli_io.hpp"

int main(int argc, char** argv) { return memsyn::run_cli(argc, argv); }
