#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace relevancy {

// Incremental SHA-256; hex output.
class Digest {
 public:
  Digest();
  ~Digest();
  Digest(const Digest&) = delete;
  Digest& operator=(const Digest&) = delete;

  Digest& update(std::string_view bytes);
  // Appends a length-prefixed field so that ("ab","c") and ("a","bc") differ.
  Digest& field(std::string_view bytes);
  Digest& file(const std::filesystem::path& path);
  std::string hex();

 private:
  void* ctx_;
};

std::string sha256_hex(std::string_view bytes);

}  // namespace relevancy
