#pragma once

#include <stdexcept>
#include <string>

namespace lgcnet {

// All recoverable failures in the library surface as this type; the message
// carries enough context (line numbers, tickers, parameters) to act on.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lgcnet
