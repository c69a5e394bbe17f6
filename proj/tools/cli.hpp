#pragma once

namespace unmix::cli {

/// Entry point behind the xrdunmix binary, callable in-process by tests.
/// Exit codes: 0 success, 1 usage error, 2 data error, 3 solver error.
int run(int argc, const char* const* argv);

}  // namespace unmix::cli
