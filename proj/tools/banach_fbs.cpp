#include "banach_fbs/cli.hpp"

int main(int argc, char** argv) { return bfbs::cli::run(argc, argv); }
