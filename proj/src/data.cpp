#include "msnet/data.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <fstream>

#include "msnet/errors.hpp"
#include "msnet/rng.hpp"

namespace msnet {

namespace {

constexpr double kBackgroundDark = 0.25;
constexpr double kBackgroundBright = 0.75;
constexpr double kSquareIntensity = 0.5;
constexpr double kNoiseAmplitude = 0.05;

}  // namespace

Dataset gen_context_shapes(int resolution, int num_samples, std::uint64_t seed) {
    if (resolution < 32 || resolution % 32 != 0)
        throw InvalidSpec("gen_context_shapes: resolution must be a positive multiple of 32");
    if (num_samples < 1) throw InvalidSpec("gen_context_shapes: need at least one sample");

    Dataset ds;
    ds.num_classes = 3;
    ds.metadata = {"context_shapes", seed, resolution};
    ds.samples.reserve(num_samples);

    // Squares snap to the 8-px grid of the score head's finest fusion stage
    // (H/8 after three 2x upsamplings of a 5-pool path), so exact boundaries
    // are representable and accuracy measures classification, not blur.
    // Sides start at two cells so foreground carries enough of the loss to
    // escape the all-background phase within a desk-scale epoch budget.
    const int cell = 8;
    const int min_cells = 2;
    const int side_choices = std::max(1, resolution / 32);

    for (int s = 0; s < num_samples; ++s) {
        RngStream rng(seed, "sample/" + std::to_string(s));
        const int theme = rng.next_double() < 0.5 ? 0 : 1;
        const double bg = theme == 0 ? kBackgroundDark : kBackgroundBright;
        const std::uint8_t square_class = theme == 0 ? 1 : 2;

        Sample sample;
        sample.image = Tensor4(1, 1, resolution, resolution);
        sample.labels = LabelMap(1, resolution, resolution);
        for (int y = 0; y < resolution; ++y)
            for (int x = 0; x < resolution; ++x)
                sample.image.at(0, 0, y, x) = bg + kNoiseAmplitude * (2.0 * rng.next_double() - 1.0);

        const int square_count = 1 + static_cast<int>(rng.next_below(3));
        int foreground_budget = resolution * resolution * 2 / 5;  // keeps background >= 50%
        std::vector<std::array<int, 3>> placed;                   // y0, x0, side
        for (int q = 0; q < square_count; ++q) {
            for (int attempt = 0; attempt < 64; ++attempt) {
                const int side = cell * (min_cells + static_cast<int>(rng.next_below(side_choices)));
                if (side * side > foreground_budget) continue;
                const int slots = (resolution - side) / cell + 1;
                const int y0 = cell * static_cast<int>(rng.next_below(slots));
                const int x0 = cell * static_cast<int>(rng.next_below(slots));
                bool overlaps = false;
                for (const auto& p : placed) {
                    const bool apart = y0 + side + 1 < p[0] || p[0] + p[2] + 1 < y0 ||
                                       x0 + side + 1 < p[1] || p[1] + p[2] + 1 < x0;
                    if (!apart) overlaps = true;
                }
                if (overlaps) continue;
                placed.push_back({y0, x0, side});
                foreground_budget -= side * side;
                for (int y = y0; y < y0 + side; ++y) {
                    for (int x = x0; x < x0 + side; ++x) {
                        sample.image.at(0, 0, y, x) =
                            kSquareIntensity + kNoiseAmplitude * (2.0 * rng.next_double() - 1.0);
                        const bool border = y == y0 || y == y0 + side - 1 || x == x0 || x == x0 + side - 1;
                        sample.labels.at(0, y, x) = border ? kIgnoreLabel : square_class;
                    }
                }
                break;
            }
        }
        ds.samples.push_back(std::move(sample));
    }
    return ds;
}

std::size_t msds_file_size(std::size_t num_samples, int channels, int h, int w) {
    const std::size_t per_sample =
        static_cast<std::size_t>(channels) * h * w * sizeof(float) + static_cast<std::size_t>(h) * w;
    return 18 + num_samples * per_sample;
}

namespace {

template <typename T>
void put_le(std::string& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw TruncatedFile("MSDS: unexpected end of file");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += sizeof(T);
    return static_cast<T>(v);
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    if (ds.samples.empty()) throw InvalidSpec("save_dataset: empty dataset");
    const Sample& first = ds.samples.front();
    std::string out;
    out.reserve(msds_file_size(ds.samples.size(), first.image.c, first.image.h, first.image.w));
    out += "MSDS";
    put_le<std::uint16_t>(out, 1);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.samples.size()));
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(ds.num_classes));
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(first.image.c));
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(first.image.h));
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(first.image.w));

    for (const Sample& s : ds.samples) {
        if (!s.image.same_extents(first.image) || !s.labels.same_extents(first.labels))
            throw InvalidSpec("save_dataset: samples must share extents");
        for (double v : s.image.data) {
            float f = static_cast<float>(v);
            std::uint32_t bits;
            std::memcpy(&bits, &f, sizeof(bits));
            put_le<std::uint32_t>(out, bits);
        }
        out.append(reinterpret_cast<const char*>(s.labels.labels.data()), s.labels.labels.size());
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("save_dataset: cannot open " + path + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("save_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("load_dataset: cannot open " + path);
    std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (in.size() < 4 || in.compare(0, 4, "MSDS") != 0)
        throw BadMagic("load_dataset: bad magic in " + path);
    std::size_t pos = 4;
    const auto version = get_le<std::uint16_t>(in, pos);
    if (version != 1)
        throw VersionUnsupported("load_dataset: unsupported MSDS version " + std::to_string(version));
    const auto num_samples = get_le<std::uint32_t>(in, pos);
    const auto num_classes = get_le<std::uint16_t>(in, pos);
    const auto channels = get_le<std::uint16_t>(in, pos);
    const auto h = get_le<std::uint16_t>(in, pos);
    const auto w = get_le<std::uint16_t>(in, pos);

    if (in.size() != msds_file_size(num_samples, channels, h, w))
        throw TruncatedFile("load_dataset: file length does not match header of " + path);

    Dataset ds;
    ds.num_classes = num_classes;
    ds.samples.reserve(num_samples);
    for (std::uint32_t s = 0; s < num_samples; ++s) {
        Sample sample;
        sample.image = Tensor4(1, channels, h, w);
        for (double& v : sample.image.data) {
            const auto bits = get_le<std::uint32_t>(in, pos);
            float fv;
            std::memcpy(&fv, &bits, sizeof(fv));
            v = fv;
        }
        sample.labels = LabelMap(1, h, w);
        std::memcpy(sample.labels.labels.data(), in.data() + pos, sample.labels.labels.size());
        pos += sample.labels.labels.size();
        ds.samples.push_back(std::move(sample));
    }
    return ds;
}

std::vector<std::uint8_t> render_pgm(const LabelMap& labels, int sample_index, int num_classes) {
    if (num_classes > 254) throw InvalidSpec("render_pgm: class count must be <= 254");
    if (sample_index < 0 || sample_index >= labels.n)
        throw InvalidArgument("render_pgm: sample index out of range");
    std::string header =
        "P5\n" + std::to_string(labels.w) + " " + std::to_string(labels.h) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    const std::size_t base = labels.index(sample_index, 0, 0);
    out.insert(out.end(), labels.labels.begin() + base,
               labels.labels.begin() + base + static_cast<std::size_t>(labels.h) * labels.w);
    return out;
}

void export_label_map(const LabelMap& labels, int sample_index, int num_classes,
                      const std::string& path) {
    const auto bytes = render_pgm(labels, sample_index, num_classes);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("export_label_map: cannot open " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("export_label_map: write failed for " + path);
}

LabelMap parse_pgm(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    auto next_token = [&]() {
        while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
        std::string tok;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(bytes[pos++]);
        return tok;
    };
    if (next_token() != "P5") throw BadMagic("parse_pgm: not a P5 file");
    const int w = std::stoi(next_token());
    const int h = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (maxval != 255) throw InvalidSpec("parse_pgm: expected maxval 255");
    ++pos;  // single whitespace byte before the raster
    if (pos + static_cast<std::size_t>(w) * h > bytes.size())
        throw TruncatedFile("parse_pgm: raster shorter than header promises");
    LabelMap labels(1, h, w);
    std::copy(bytes.begin() + pos, bytes.begin() + pos + static_cast<std::size_t>(w) * h,
              labels.labels.begin());
    return labels;
}

}  // namespace msnet
