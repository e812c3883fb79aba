#include "diracloc/cli.h"

int main(int argc, char** argv) { return diracloc::cli::main_entry(argc, argv); }
