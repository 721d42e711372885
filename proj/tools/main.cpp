#include "cli.hpp"

int main(int argc, char** argv) { return voltopo::cli::run(argc, argv); }
