#include "pcqa/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace pcqa {

namespace {

constexpr char kMagic[8] = {'P', 'C', 'Q', 'A', 'C', 'K', 'P', 'T'};

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw CheckpointError(std::string("checkpoint truncated reading ") + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

const NamedTensor* Checkpoint::find(const std::string& name) const {
    for (const auto& t : tensors)
        if (t.name == name) return &t;
    return nullptr;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write checkpoint '" + path.string() + "'");
    out.write(kMagic, 8);
    put_u32(out, c.version);
    put_u32(out, static_cast<std::uint32_t>(c.header_json.size()));
    out.write(c.header_json.data(), static_cast<std::streamsize>(c.header_json.size()));
    put_u32(out, static_cast<std::uint32_t>(c.tensors.size()));
    for (const auto& t : c.tensors) {
        put_u32(out, static_cast<std::uint32_t>(t.name.size()));
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
        std::size_t n = 1;
        for (int d : t.shape) {
            put_u32(out, static_cast<std::uint32_t>(d));
            n *= static_cast<std::size_t>(d);
        }
        if (n != t.values.size()) throw CheckpointError("tensor '" + t.name + "' shape/value mismatch");
        for (float f : t.values) {
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            put_u32(out, u);
        }
    }
    if (!out) throw CheckpointError("I/O failure writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw CheckpointError("'" + path.string() + "' is not a pcqa checkpoint");
    Checkpoint c;
    c.version = get_u32(in, "version");
    if (c.version != 1) throw CheckpointError("unsupported checkpoint version " + std::to_string(c.version));
    const std::uint32_t hlen = get_u32(in, "header length");
    c.header_json.resize(hlen);
    if (!in.read(c.header_json.data(), hlen)) throw CheckpointError("checkpoint truncated reading header");
    const std::uint32_t count = get_u32(in, "tensor count");
    c.tensors.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor t;
        const std::uint32_t nlen = get_u32(in, "tensor name length");
        t.name.resize(nlen);
        if (!in.read(t.name.data(), nlen)) throw CheckpointError("checkpoint truncated reading tensor name");
        const std::uint32_t rank = get_u32(in, "tensor rank");
        std::size_t n = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            const std::uint32_t dim = get_u32(in, "tensor dim");
            t.shape.push_back(static_cast<int>(dim));
            n *= dim;
        }
        t.values.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const std::uint32_t u = get_u32(in, "tensor value");
            float f;
            std::memcpy(&f, &u, 4);
            t.values[j] = f;
        }
        c.tensors.push_back(std::move(t));
    }
    return c;
}

} // namespace pcqa
