#include "cli.hpp"

int main(int argc, char** argv) { return qdoubling::cli::run(argc, argv); }
