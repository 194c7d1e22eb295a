#include <magzoll/cli.hpp>

int main(int argc, char** argv)
{
    return magzoll::cli::run(argc, argv);
}
