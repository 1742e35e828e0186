#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uqcli {

/// I/O or parse failure; maps to exit code 2 in the CLI.
struct TensorIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Tensor {
  std::string dtype;  // "F32" or "F64", little-endian payload
  std::vector<std::int64_t> shape;
  std::vector<unsigned char> raw;

  std::size_t element_count() const;
  std::size_t element_size() const;
  std::vector<double> as_doubles() const;
};

/// Length-prefixed container: an 8-byte little-endian header length, a JSON
/// header naming each tensor's dtype/shape/data_offsets (offsets relative to
/// the payload start), then the contiguous payload. Writing is canonical
/// (sorted names, compact JSON, space padding to an 8-byte boundary), so
/// read followed by write reproduces a written file byte for byte.
class TensorFile {
 public:
  void add(const std::string& name, std::vector<std::int64_t> shape,
           std::span<const double> data, const std::string& dtype = "F64");

  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  const Tensor& tensor(const std::string& name) const;
  std::vector<std::string> names() const;

  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  static TensorFile read(const std::string& path);
  void write(const std::string& path) const;

 private:
  std::map<std::string, Tensor> tensors_;
  std::map<std::string, std::string> metadata_;
};

}  // namespace uqcli
