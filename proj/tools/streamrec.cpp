#include "streamrec/cli.hpp"

int main(int argc, char** argv) { return streamrec::cli::run(argc, argv); }
