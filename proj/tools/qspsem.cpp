#include "qspsem/cli.hpp"

int main(int argc, char** argv) { return qspsem::cli::run(argc, argv); }
