#include "leach/cli.hpp"

int main(int argc, char** argv) { return leach::cli_main(argc, argv); }
