#pragma once

#include <stdexcept>
#include <string>

namespace gcstab {

/// Every library failure carries the module that raised it and a stable,
/// machine-readable code such as "rootdata.DegenerateGram".
class Error : public std::runtime_error {
public:
    Error(std::string module, std::string code, const std::string& message)
        : std::runtime_error(module + "." + code + ": " + message),
          module_(std::move(module)),
          code_(std::move(code)),
          detail_(message) {}

    const std::string& module() const noexcept { return module_; }
    const std::string& code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }
    std::string tag() const { return module_ + "." + code_; }

private:
    std::string module_;
    std::string code_;
    std::string detail_;
};

}  // namespace gcstab
