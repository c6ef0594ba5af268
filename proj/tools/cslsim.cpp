#include "csl/cli.hpp"

int main(int argc, char** argv) { return csl::dispatch(argc, argv); }
