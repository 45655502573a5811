#include "reclens/cli.hpp"

int main(int argc, char** argv) { return reclens::cli::run(argc, argv); }
