#include "tvnav/cli.hpp"

int main(int argc, char** argv) { return tvnav::cli_main(argc, argv); }
