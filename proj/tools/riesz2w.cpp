#include "riesz2w/cli.hpp"

int main(int argc, char** argv) { return riesz2w::cli::run(argc, argv); }
