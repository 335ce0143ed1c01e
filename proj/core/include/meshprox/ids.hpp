#pragma once

#include <string>

namespace meshprox {

using NodeId = std::string;
using ProxyId = std::string;

}  // namespace meshprox
