#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relevancy {

// Error categories map one-to-one onto the C API status codes and the CLI
// exit codes, so every throw site picks the category the caller will see.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class MissingResource : public Error {
 public:
  using Error::Error;
};

// Seeded generator with a fully specified output sequence.
//
// std::uniform_int_distribution and friends are implementation-defined, so a
// seeded run could differ between standard libraries. Everything that draws
// random numbers in this project goes through this wrapper instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  // Uniform in [0, n); n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  // Uniform in [0, 1) with 53 random bits.
  double uniform01();
  double normal();

 private:
  std::uint64_t state_[4];
};

// splitmix64 finalizer; used to derive independent seeds from the run seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);
std::string format_float(float value);

// Strict full-token parse. Returns nullopt for anything but a complete number.
std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::vector<std::string_view> split_view(std::string_view text, char sep);
std::string_view trim(std::string_view text);

// Writes "warning: <message>" to stderr.
void log_warning(std::string_view message);

}  // namespace relevancy
