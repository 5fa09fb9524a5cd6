#include "qkrylov/cli.hpp"

int main(int argc, char** argv) { return qkrylov::cli_main(argc, argv); }
