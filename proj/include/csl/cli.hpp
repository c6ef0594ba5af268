#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace csl {

/// Entry point behind the cslsim executable. Returns 0 on success, 1 for
/// configuration or usage errors, 2 for numerical failures.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace csl
