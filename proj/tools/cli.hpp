#pragma once

namespace pvmark::cli {

// Exit status: 0 success or accept, 1 reject, 2 usage or I/O error.
int run(int argc, char** argv);

}  // namespace pvmark::cli
