#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pathnav {

std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& data);

std::string base64_encode(const std::uint8_t* data, std::size_t size);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
void write_binary_file(const std::filesystem::path& path,
                       const std::uint8_t* data, std::size_t size);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

// "k/1000" rendered as a plain decimal, e.g. fixed_decimal(1500, 3) == "1.500".
// Serialization goes through integers so parse(serialize(x)) is reproducible.
std::string fixed_decimal(long long scaled, int decimals);

}  // namespace pathnav
