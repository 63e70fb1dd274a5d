#pragma once

namespace swarmsim {
int run_cli(int argc, char** argv);
}
