#include "commands.hpp"

int main(int argc, char** argv)
{
    return vbsynth::cli::run(argc, argv);
}
