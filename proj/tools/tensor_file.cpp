#include "tensor_file.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

namespace uqcli {

static_assert(std::endian::native == std::endian::little,
              "tensor container assumes a little-endian host");

using nlohmann::json;

std::size_t Tensor::element_size() const {
  if (dtype == "F64") return 8;
  if (dtype == "F32") return 4;
  throw TensorIoError("unsupported dtype: " + dtype);
}

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (std::int64_t d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

std::vector<double> Tensor::as_doubles() const {
  const std::size_t n = element_count();
  std::vector<double> out(n);
  if (dtype == "F64") {
    std::memcpy(out.data(), raw.data(), n * sizeof(double));
  } else {
    std::vector<float> tmp(n);
    std::memcpy(tmp.data(), raw.data(), n * sizeof(float));
    std::copy(tmp.begin(), tmp.end(), out.begin());
  }
  return out;
}

void TensorFile::add(const std::string& name, std::vector<std::int64_t> shape,
                     std::span<const double> data, const std::string& dtype) {
  if (name.empty() || name == "__metadata__") throw TensorIoError("bad tensor name");
  if (tensors_.count(name) != 0) throw TensorIoError("duplicate tensor: " + name);
  Tensor t;
  t.dtype = dtype;
  t.shape = std::move(shape);
  std::size_t n = 1;
  for (std::int64_t d : t.shape) {
    if (d < 0) throw TensorIoError("negative dimension in tensor " + name);
    n *= static_cast<std::size_t>(d);
  }
  if (n != data.size()) throw TensorIoError("shape/data mismatch for tensor " + name);
  if (dtype == "F64") {
    t.raw.resize(n * 8);
    std::memcpy(t.raw.data(), data.data(), t.raw.size());
  } else if (dtype == "F32") {
    std::vector<float> tmp(data.begin(), data.end());
    t.raw.resize(n * 4);
    std::memcpy(t.raw.data(), tmp.data(), t.raw.size());
  } else {
    throw TensorIoError("unsupported dtype: " + dtype);
  }
  tensors_.emplace(name, std::move(t));
}

const Tensor& TensorFile::tensor(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw TensorIoError("missing tensor: " + name);
  return it->second;
}

std::vector<std::string> TensorFile::names() const {
  std::vector<std::string> out;
  out.reserve(tensors_.size());
  for (const auto& [name, t] : tensors_) out.push_back(name);
  return out;
}

TensorFile TensorFile::read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TensorIoError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 8) throw TensorIoError("file too short: " + path);

  std::uint64_t header_len = 0;
  std::memcpy(&header_len, bytes.data(), 8);
  if (header_len > bytes.size() - 8) {
    throw TensorIoError("header length exceeds file size: " + path);
  }
  const char* header_begin = reinterpret_cast<const char*>(bytes.data() + 8);
  json header;
  try {
    header = json::parse(header_begin, header_begin + header_len);
  } catch (const json::exception& e) {
    throw TensorIoError("malformed header in " + path + ": " + e.what());
  }
  if (!header.is_object()) throw TensorIoError("header is not an object: " + path);

  const unsigned char* payload = bytes.data() + 8 + header_len;
  const std::size_t payload_size = bytes.size() - 8 - header_len;

  TensorFile out;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> spans;
  for (const auto& [name, entry] : header.items()) {
    if (name == "__metadata__") {
      if (!entry.is_object()) throw TensorIoError("__metadata__ must be an object");
      for (const auto& [k, v] : entry.items()) {
        if (!v.is_string()) throw TensorIoError("__metadata__ values must be strings");
        out.metadata_[k] = v.get<std::string>();
      }
      continue;
    }
    if (!entry.is_object() || !entry.contains("dtype") || !entry.contains("shape") ||
        !entry.contains("data_offsets")) {
      throw TensorIoError("incomplete entry for tensor " + name);
    }
    Tensor t;
    t.dtype = entry["dtype"].get<std::string>();
    if (t.dtype != "F32" && t.dtype != "F64") {
      throw TensorIoError("unsupported dtype in tensor " + name + ": " + t.dtype);
    }
    for (const auto& d : entry["shape"]) {
      const auto v = d.get<std::int64_t>();
      if (v < 0) throw TensorIoError("negative dimension in tensor " + name);
      t.shape.push_back(v);
    }
    const auto offs = entry["data_offsets"];
    if (!offs.is_array() || offs.size() != 2) {
      throw TensorIoError("bad data_offsets for tensor " + name);
    }
    const auto begin = offs[0].get<std::uint64_t>();
    const auto end = offs[1].get<std::uint64_t>();
    if (begin > end || end > payload_size) {
      throw TensorIoError("data_offsets out of bounds for tensor " + name);
    }
    if (end - begin != t.element_count() * t.element_size()) {
      throw TensorIoError("data_offsets do not match shape for tensor " + name);
    }
    t.raw.assign(payload + begin, payload + end);
    spans.emplace_back(begin, end);
    out.tensors_.emplace(name, std::move(t));
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].first < spans[i - 1].second) {
      throw TensorIoError("overlapping tensor payloads in " + path);
    }
  }
  return out;
}

void TensorFile::write(const std::string& path) const {
  json header = json::object();
  if (!metadata_.empty()) {
    header["__metadata__"] = metadata_;
  }
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors_) {
    header[name] = {{"dtype", t.dtype},
                    {"shape", t.shape},
                    {"data_offsets", {offset, offset + t.raw.size()}}};
    offset += t.raw.size();
  }
  std::string text = header.dump();
  while (text.size() % 8 != 0) text.push_back(' ');
  const std::uint64_t header_len = text.size();

  std::ofstream outf(path, std::ios::binary | std::ios::trunc);
  if (!outf) throw TensorIoError("cannot write " + path);
  outf.write(reinterpret_cast<const char*>(&header_len), 8);
  outf.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, t] : tensors_) {
    outf.write(reinterpret_cast<const char*>(t.raw.data()),
               static_cast<std::streamsize>(t.raw.size()));
  }
  if (!outf) throw TensorIoError("write failed for " + path);
}

}  // namespace uqcli
