#pragma once

#include <string>
#include <string_view>

namespace cyclebench {

// Lowercase hex SHA-256 of the bytes.
std::string Sha256Hex(std::string_view bytes);

// Incremental form for data that arrives in pieces.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(Sha256 const&) = delete;
  Sha256& operator=(Sha256 const&) = delete;

  void Update(std::string_view bytes);
  std::string HexDigest();

 private:
  void* ctx_;
};

}  // namespace cyclebench
