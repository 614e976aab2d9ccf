#include "cli.hpp"

int main(int argc, char** argv) { return fsreach::cli::dispatch(argc, argv); }
