#include "pspectral/cli.hpp"

int main(int argc, char** argv) { return pspectral::run_cli(argc, argv); }
