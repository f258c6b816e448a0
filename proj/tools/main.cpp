#include "wpic/cli.hpp"

int main(int argc, char** argv) { return wpic::cli_main(argc, argv); }
