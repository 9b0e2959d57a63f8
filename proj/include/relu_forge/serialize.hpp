#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "relu_forge/net_ir.hpp"

namespace relu_forge {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::string path, std::size_t offset = 0)
        : std::runtime_error(what), path_(std::move(path)), offset_(offset) {}
    // JSON pointer of the offending value ("" for syntax errors).
    const std::string& path() const { return path_; }
    // Byte offset for syntax errors.
    std::size_t offset() const { return offset_; }

private:
    std::string path_;
    std::size_t offset_;
};

inline constexpr int kFormatVersion = 1;

std::string serialize(const Network& net);
Network deserialize(std::string_view text);

void save_network(const Network& net, const std::filesystem::path& file);
Network load_network(const std::filesystem::path& file);

} // namespace relu_forge
