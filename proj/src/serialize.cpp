#include "msnet/serialize.hpp"

#include <cstring>
#include <fstream>

#include "msnet/errors.hpp"

namespace msnet {

namespace {

template <typename T>
void put_le(std::string& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_le<std::uint64_t>(out, bits);
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw TruncatedFile("MSWT: unexpected end of file");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += sizeof(T);
    return static_cast<T>(v);
}

double get_f64(const std::string& in, std::size_t& pos) {
    const std::uint64_t bits = get_le<std::uint64_t>(in, pos);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

}  // namespace

void save_weights(const ParamStore& store, const std::string& config_json,
                  const std::string& path) {
    std::string out;
    out += "MSWT";
    put_le<std::uint16_t>(out, 1);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(config_json.size()));
    out += config_json;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(store.slots.size()));
    for (const ParamSlot& slot : store.slots) {
        const ConvParams& p = slot.params;
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(slot.name.size()));
        out += slot.name;
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(p.out_channels));
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(p.in_channels));
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(p.kernel_h));
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(p.kernel_w));
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(p.stride));
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(p.padding));
        out.push_back(p.per_channel ? 1 : 0);
        put_le<std::uint64_t>(out, p.weights.size());
        for (double v : p.weights) put_f64(out, v);
        put_le<std::uint64_t>(out, p.bias.size());
        for (double v : p.bias) put_f64(out, v);
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("save_weights: cannot open " + path + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("save_weights: write failed for " + path);
}

LoadedWeights load_weights(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("load_weights: cannot open " + path);
    std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (in.size() < 4 || in.compare(0, 4, "MSWT") != 0)
        throw BadMagic("load_weights: bad magic in " + path);
    std::size_t pos = 4;
    const auto version = get_le<std::uint16_t>(in, pos);
    if (version != 1)
        throw VersionUnsupported("load_weights: unsupported MSWT version " + std::to_string(version));

    LoadedWeights lw;
    const auto json_len = get_le<std::uint32_t>(in, pos);
    if (pos + json_len > in.size()) throw TruncatedFile("MSWT: config block truncated");
    lw.config_json = in.substr(pos, json_len);
    pos += json_len;

    const auto slot_count = get_le<std::uint32_t>(in, pos);
    lw.store.slots.reserve(slot_count);
    for (std::uint32_t s = 0; s < slot_count; ++s) {
        ParamSlot slot;
        const auto name_len = get_le<std::uint16_t>(in, pos);
        if (pos + name_len > in.size()) throw TruncatedFile("MSWT: slot name truncated");
        slot.name = in.substr(pos, name_len);
        pos += name_len;
        ConvParams& p = slot.params;
        p.out_channels = get_le<std::uint16_t>(in, pos);
        p.in_channels = get_le<std::uint16_t>(in, pos);
        p.kernel_h = get_le<std::uint16_t>(in, pos);
        p.kernel_w = get_le<std::uint16_t>(in, pos);
        p.stride = get_le<std::uint16_t>(in, pos);
        p.padding = get_le<std::uint16_t>(in, pos);
        if (pos >= in.size()) throw TruncatedFile("MSWT: slot flags truncated");
        p.per_channel = in[pos++] != 0;
        const auto wn = get_le<std::uint64_t>(in, pos);
        p.weights.resize(wn);
        for (auto& v : p.weights) v = get_f64(in, pos);
        const auto bn = get_le<std::uint64_t>(in, pos);
        p.bias.resize(bn);
        for (auto& v : p.bias) v = get_f64(in, pos);
        p.validate();
        lw.store.slots.push_back(std::move(slot));
    }
    if (pos != in.size()) throw TruncatedFile("MSWT: trailing bytes after the last slot");
    return lw;
}

void assign_weights(ParamStore& into, const ParamStore& from) {
    if (into.slots.size() != from.slots.size())
        throw ShapeMismatch("assign_weights: slot count mismatch");
    for (std::size_t s = 0; s < into.slots.size(); ++s) {
        ParamSlot& dst = into.slots[s];
        const ParamSlot& src = from.slots[s];
        if (dst.name != src.name)
            throw ShapeMismatch("assign_weights: slot order differs at " + dst.name + " vs " +
                                src.name);
        if (dst.params.weights.size() != src.params.weights.size() ||
            dst.params.bias.size() != src.params.bias.size())
            throw ShapeMismatch("assign_weights: shape mismatch at slot " + dst.name);
        dst.params.weights = src.params.weights;
        dst.params.bias = src.params.bias;
    }
    into.reset_momentum();
}

}  // namespace msnet
