#include "madelung/cli.hpp"

int main(int argc, char** argv) { return madelung::cli::run(argc, argv); }
