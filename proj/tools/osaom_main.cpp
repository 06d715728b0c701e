#include "osaom/cli.hpp"

int main(int argc, char** argv) { return osaom::run_cli(argc, argv); }
