#pragma once
#include <stdexcept>
#include <string>

namespace parh {

// Every failure carries a machine-readable kind ("schema-mismatch",
// "bad-metric", ...). The CLI maps kinds to exit codes.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

[[noreturn]] inline void fail(const std::string& kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace parh
