#include "cli.hpp"

int main(int argc, char** argv) { return phinv::cli::run(argc, argv); }
