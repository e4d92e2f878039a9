// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - executable entry point

#include "mmsounder/cli.hpp"

int main(int argc, char **argv)
{
    return mmsounder::run_cli(argc, argv);
}
