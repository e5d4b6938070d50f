#include "container.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace toric {

namespace {

constexpr char kMagic[4] = {'N', 'Q', 'D', '1'};

static_assert(std::endian::native == std::endian::little,
              "container i/o assumes a little-endian host");

template <class T>
void put(std::ofstream& f, T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(std::ifstream& f) {
    T v;
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw std::runtime_error("tensor file: truncated");
    return v;
}

}  // namespace

void write_tensor_file(const std::string& path, const NamedTensors& tensors) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("tensor file: cannot open " + path + " for writing");
    f.write(kMagic, 4);
    put<std::uint32_t>(f, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        if (name.size() > 0xffff) throw std::invalid_argument("tensor name too long");
        if (t.rank() > 0xff) throw std::invalid_argument("tensor rank too large");
        put<std::uint16_t>(f, static_cast<std::uint16_t>(name.size()));
        f.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<std::uint8_t>(f, static_cast<std::uint8_t>(t.rank()));
        for (auto d : t.shape()) put<std::uint32_t>(f, static_cast<std::uint32_t>(d));
        f.write(reinterpret_cast<const char*>(t.data()),
                static_cast<std::streamsize>(t.numel() * sizeof(float)));
    }
    if (!f) throw std::runtime_error("tensor file: write failed for " + path);
}

NamedTensors read_tensor_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("tensor file: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("tensor file: bad magic in " + path);
    auto count = take<std::uint32_t>(f);
    NamedTensors out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        auto name_len = take<std::uint16_t>(f);
        std::string name(name_len, '\0');
        f.read(name.data(), name_len);
        if (!f) throw std::runtime_error("tensor file: truncated");
        auto rank = take<std::uint8_t>(f);
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = take<std::uint32_t>(f);
        Tensor t(shape);
        f.read(reinterpret_cast<char*>(t.data()),
               static_cast<std::streamsize>(t.numel() * sizeof(float)));
        if (!f) throw std::runtime_error("tensor file: truncated");
        out.emplace_back(std::move(name), std::move(t));
    }
    f.peek();
    if (!f.eof()) throw std::runtime_error("tensor file: trailing bytes in " + path);
    return out;
}

const Tensor* find_tensor(const NamedTensors& ts, const std::string& name) {
    for (const auto& [n, t] : ts)
        if (n == name) return &t;
    return nullptr;
}

const Tensor& must_tensor(const NamedTensors& ts, const std::string& name) {
    const Tensor* t = find_tensor(ts, name);
    if (!t) throw std::runtime_error("tensor file: missing tensor " + name);
    return *t;
}

}  // namespace toric
