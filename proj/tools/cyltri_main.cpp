#include "cyltri/cli.hpp"

int main(int argc, char** argv) { return cyltri::cli_main(argc, argv); }
