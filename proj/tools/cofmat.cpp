#include "cofmat/cli.hpp"

int main(int argc, char** argv) { return cofmat::cli::main(argc, argv); }
