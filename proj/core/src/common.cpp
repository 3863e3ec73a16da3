#include "esgpv/common.hpp"

#include <iostream>

namespace esgpv {

void warn(const std::string& message) {
    std::cerr << "esgpv: warning: " << message << "\n";
}

} // namespace esgpv
