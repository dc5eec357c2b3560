#include "relbosons/cli.hpp"

int main(int argc, char** argv) { return relbosons::cli::run(argc, argv); }
