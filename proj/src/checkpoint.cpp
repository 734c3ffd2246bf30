// SPDX-License-Identifier: Apache-2.0
#include "vidcap/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vidcap {

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ofstream& out, double d) {
    std::uint64_t v = 0;
    std::memcpy(&v, &d, 8);
    if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
    out.write(reinterpret_cast<const char*>(&v), 8);
}

bool get_u32(std::ifstream& in, std::uint32_t& v) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
    v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
        (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    return true;
}

double get_f64(std::ifstream& in) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), 8)) {
        throw std::runtime_error("checkpoint: truncated tensor data");
    }
    if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
    double d = 0.0;
    std::memcpy(&d, &v, 8);
    return d;
}

}  // namespace

void save_tensors(const std::string& path,
                  const std::vector<std::pair<std::string, const ad::Tensor*>>& tensors) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
    for (const auto& [name, t] : tensors) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(out, static_cast<std::uint32_t>(t->shape.size()));
        for (int d : t->shape) put_u32(out, static_cast<std::uint32_t>(d));
        for (double v : t->val) put_f64(out, v);
    }
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

std::map<std::string, ad::Tensor> load_tensors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("checkpoint: cannot open " + path);
    std::map<std::string, ad::Tensor> out;
    std::uint32_t name_len = 0;
    while (get_u32(in, name_len)) {
        if (name_len == 0 || name_len > 4096) {
            throw std::runtime_error("checkpoint: implausible name length in " + path);
        }
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) {
            throw std::runtime_error("checkpoint: truncated name in " + path);
        }
        std::uint32_t rank = 0;
        if (!get_u32(in, rank) || rank == 0 || rank > 2) {
            throw std::runtime_error("checkpoint: bad rank for tensor '" + name + "'");
        }
        std::vector<int> shape(rank);
        std::size_t numel = 1;
        for (auto& d : shape) {
            std::uint32_t v = 0;
            if (!get_u32(in, v) || v == 0) {
                throw std::runtime_error("checkpoint: bad shape for tensor '" + name + "'");
            }
            d = static_cast<int>(v);
            numel *= v;
        }
        ad::Tensor t(shape, false);
        for (std::size_t i = 0; i < numel; ++i) t.val[i] = get_f64(in);
        t.name = name;
        if (out.count(name)) {
            throw std::runtime_error("checkpoint: duplicate tensor '" + name + "'");
        }
        out.emplace(std::move(name), std::move(t));
    }
    if (out.empty()) throw std::runtime_error("checkpoint: no tensors in " + path);
    return out;
}

}  // namespace vidcap
