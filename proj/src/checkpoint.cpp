#include "longcode/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "longcode/error.hpp"

namespace longcode {
namespace {

constexpr const char* kManifestHeader = "# longcode tensor manifest v1";

std::string format_shape(const Shape& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out;
}

Shape parse_shape(const std::string& text, std::size_t line_no) {
  Shape shape;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      shape.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": bad shape '" + text + "'");
    }
  }
  if (shape.empty()) {
    throw FormatError("manifest line " + std::to_string(line_no) + ": empty shape");
  }
  return shape;
}

void put_le32(std::uint32_t bits, char* out) {
  for (int b = 0; b < 4; ++b) out[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
}

std::uint32_t get_le32(const unsigned char* in) {
  return static_cast<std::uint32_t>(in[0]) | (static_cast<std::uint32_t>(in[1]) << 8) |
         (static_cast<std::uint32_t>(in[2]) << 16) | (static_cast<std::uint32_t>(in[3]) << 24);
}

}  // namespace

void save_tensors(const std::filesystem::path& manifest, const std::filesystem::path& blob,
                  const ParameterList<float>& tensors) {
  std::ofstream mf(manifest, std::ios::trunc);
  std::ofstream bf(blob, std::ios::binary | std::ios::trunc);
  if (!mf || !bf) {
    throw IoError("cannot write checkpoint " + manifest.string() + " / " + blob.string());
  }
  mf << kManifestHeader << '\n';
  std::uint64_t offset = 0;
  std::vector<char> buffer;
  for (const auto& [name, tensor] : tensors) {
    if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
      throw FormatError("tensor name '" + name + "' must be non-empty without whitespace");
    }
    mf << name << ' ' << format_shape(tensor.shape()) << ' ' << offset << '\n';
    const auto values = tensor.values();
    buffer.resize(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
      put_le32(std::bit_cast<std::uint32_t>(values[i]), buffer.data() + 4 * i);
    }
    bf.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    offset += buffer.size();
  }
  if (!mf || !bf) throw IoError("short write to checkpoint " + blob.string());
}

std::vector<StoredTensor> load_tensors(const std::filesystem::path& manifest,
                                       const std::filesystem::path& blob) {
  std::ifstream mf(manifest);
  if (!mf) throw IoError("cannot open manifest " + manifest.string());
  std::ifstream bf(blob, std::ios::binary);
  if (!bf) throw IoError("cannot open tensor blob " + blob.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(bf)),
                                         std::istreambuf_iterator<char>());

  std::vector<StoredTensor> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(mf, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string name, shape_text;
    std::uint64_t offset = 0;
    if (!(ls >> name >> shape_text >> offset)) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": expected 'name shape offset'");
    }
    StoredTensor t{name, parse_shape(shape_text, line_no), {}};
    const std::size_t n = shape_numel(t.shape);
    if (offset + 4 * n > bytes.size()) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": tensor '" + name +
                        "' extends past end of blob");
    }
    t.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      t.values[i] = std::bit_cast<float>(get_le32(bytes.data() + offset + 4 * i));
    }
    out.push_back(std::move(t));
  }
  return out;
}

void load_into(const std::filesystem::path& manifest, const std::filesystem::path& blob,
               const ParameterList<float>& targets) {
  auto stored = load_tensors(manifest, blob);
  std::map<std::string, StoredTensor*> by_name;
  for (auto& t : stored) by_name[t.name] = &t;
  if (stored.size() != targets.size()) {
    throw FormatError("checkpoint holds " + std::to_string(stored.size()) +
                      " tensors, model expects " + std::to_string(targets.size()));
  }
  for (const auto& [name, tensor] : targets) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw FormatError("checkpoint is missing tensor '" + name + "'");
    if (it->second->shape != tensor.shape()) {
      throw ShapeError("checkpoint tensor '" + name + "' has shape " +
                       shape_string(it->second->shape) + ", model expects " +
                       shape_string(tensor.shape()));
    }
    Tensor<float> handle = tensor;
    std::copy(it->second->values.begin(), it->second->values.end(),
              handle.mutable_values().begin());
  }
}

}  // namespace longcode
