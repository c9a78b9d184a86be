#include "holo/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace holo {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void append_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void append_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f32(std::string& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    append_u32(out, bits);
}

void append_f64(std::string& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

struct Reader {
    const uint8_t* p;
    size_t left;
    void need(size_t n) const {
        if (left < n) throw std::runtime_error("truncated file");
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(p[0] | (p[1] << 8));
        p += 2;
        left -= 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
        p += 4;
        left -= 4;
        return v;
    }
    uint8_t u8() {
        need(1);
        uint8_t v = p[0];
        ++p;
        --left;
        return v;
    }
    float f32() {
        uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        need(8);
        uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(p[i]) << (8 * i);
        p += 8;
        left -= 8;
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

struct PngImage {
    int width = 0, height = 0, channels = 0, bit_depth = 0;
    std::vector<uint16_t> samples;  // interleaved, native value range
};

PngImage read_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw std::runtime_error("cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw std::runtime_error("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw std::runtime_error("failed to decode " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    if (depth == 16) png_set_swap(png);  // little-endian in-memory samples
    png_read_update_info(png, info);

    PngImage img;
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.bit_depth = png_get_bit_depth(png, info);
    img.channels = png_get_channels(png, info);
    const size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<uint8_t> raw(rowbytes * img.height);
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y) rows[y] = raw.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);

    img.samples.resize(static_cast<size_t>(img.width) * img.height * img.channels);
    if (img.bit_depth == 16) {
        for (size_t i = 0; i < img.samples.size(); ++i) {
            uint16_t v;
            std::memcpy(&v, raw.data() + 2 * i, 2);
            img.samples[i] = v;
        }
    } else {
        for (size_t i = 0; i < img.samples.size(); ++i) img.samples[i] = raw[i];
    }
    return img;
}

void write_png_gray8(const std::string& path, const std::vector<uint8_t>& pix, int w, int h) {
    const std::string tmp = path + ".tmp";
    FILE* fp = std::fopen(tmp.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot write " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw std::runtime_error("failed to encode " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < h; ++y)
        png_write_row(png, const_cast<png_bytep>(pix.data() + static_cast<size_t>(y) * w));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename into " + path);
}

void write_png_rgb8(const std::string& path, const std::vector<uint8_t>& pix, int w, int h) {
    const std::string tmp = path + ".tmp";
    FILE* fp = std::fopen(tmp.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot write " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw std::runtime_error("failed to encode " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < h; ++y)
        png_write_row(png, const_cast<png_bytep>(pix.data() + static_cast<size_t>(y) * w * 3));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename into " + path);
}

void write_png_gray16(const std::string& path, const std::vector<uint16_t>& pix, int w, int h) {
    const std::string tmp = path + ".tmp";
    FILE* fp = std::fopen(tmp.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot write " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw std::runtime_error("failed to encode " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, w, h, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_set_swap(png);  // in-memory samples are little-endian
    for (int y = 0; y < h; ++y)
        png_write_row(png, const_cast<png_bytep>(reinterpret_cast<const png_byte*>(
                               pix.data() + static_cast<size_t>(y) * w)));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename into " + path);
}

}  // namespace

double srgb_to_linear(double s) {
    return s <= 0.04045 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double l) {
    l = std::clamp(l, 0.0, 1.0);
    return l <= 0.0031308 ? 12.92 * l : 1.055 * std::pow(l, 1.0 / 2.4) - 0.055;
}

void atomic_write(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename into " + path);
}

void write_field(const std::string& path, const ComplexField& field, bool as_f64) {
    std::string out;
    out.reserve(16 + field.size() * 2 * (as_f64 ? 8 : 4));
    out += "CGHF";
    append_u16(out, 1);
    append_u32(out, static_cast<uint32_t>(field.channels));
    append_u32(out, static_cast<uint32_t>(field.height));
    append_u32(out, static_cast<uint32_t>(field.width));
    out.push_back(as_f64 ? 1 : 0);
    if (as_f64) {
        for (double v : field.real) append_f64(out, v);
        for (double v : field.imag) append_f64(out, v);
    } else {
        for (double v : field.real) append_f32(out, static_cast<float>(v));
        for (double v : field.imag) append_f32(out, static_cast<float>(v));
    }
    atomic_write(path, out);
}

ComplexField read_field(const std::string& path) {
    const std::string bytes = read_all(path);
    Reader r{reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()};
    r.need(4);
    if (std::memcmp(r.p, "CGHF", 4) != 0) throw std::runtime_error(path + ": not a CGHF file");
    r.p += 4;
    r.left -= 4;
    const uint16_t version = r.u16();
    if (version != 1) throw std::runtime_error(path + ": unsupported CGHF version");
    const uint32_t c = r.u32(), h = r.u32(), w = r.u32();
    const uint8_t dtype = r.u8();
    if (dtype > 1) throw std::runtime_error(path + ": unknown CGHF dtype");
    ComplexField f(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w));
    const size_t n = f.size();
    if (dtype == 1) {
        r.need(n * 16);
        for (size_t i = 0; i < n; ++i) f.real[i] = r.f64();
        for (size_t i = 0; i < n; ++i) f.imag[i] = r.f64();
    } else {
        r.need(n * 8);
        for (size_t i = 0; i < n; ++i) f.real[i] = r.f32();
        for (size_t i = 0; i < n; ++i) f.imag[i] = r.f32();
    }
    if (r.left != 0) throw std::runtime_error(path + ": trailing bytes");
    return f;
}

void write_gaussians(const std::string& path, const GaussianSet& set) {
    std::string out;
    out += "CGGS";
    append_u16(out, 1);
    append_u32(out, static_cast<uint32_t>(set.count));
    append_u32(out, static_cast<uint32_t>(set.channels));
    auto dump = [&out](const std::vector<double>& v) {
        for (double x : v) append_f32(out, static_cast<float>(x));
    };
    dump(set.pre_position);
    dump(set.pre_scale);
    dump(set.rotation);
    dump(set.amplitude);
    dump(set.phase);
    dump(set.pre_opacity);
    atomic_write(path, out);
}

GaussianSet read_gaussians(const std::string& path) {
    const std::string bytes = read_all(path);
    Reader r{reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()};
    r.need(4);
    if (std::memcmp(r.p, "CGGS", 4) != 0) throw std::runtime_error(path + ": not a CGGS file");
    r.p += 4;
    r.left -= 4;
    const uint16_t version = r.u16();
    if (version != 1) throw std::runtime_error(path + ": unsupported CGGS version");
    const uint32_t n = r.u32(), c = r.u32();
    GaussianSet set(static_cast<int>(n), static_cast<int>(c));
    auto slurp = [&r](std::vector<double>& v) {
        for (double& x : v) x = r.f32();
    };
    slurp(set.pre_position);
    slurp(set.pre_scale);
    slurp(set.rotation);
    slurp(set.amplitude);
    slurp(set.phase);
    slurp(set.pre_opacity);
    if (r.left != 0) throw std::runtime_error(path + ": trailing bytes");
    return set;
}

RealField read_image_linear(const std::string& path) {
    const PngImage img = read_png(path);
    if (img.channels != 1 && img.channels != 3)
        throw std::runtime_error(path + ": expected grayscale or RGB image");
    const double maxv = img.bit_depth == 16 ? 65535.0 : 255.0;
    RealField out(img.channels, img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                const uint16_t v =
                    img.samples[(static_cast<size_t>(y) * img.width + x) * img.channels + c];
                out.at(c, y, x) = srgb_to_linear(v / maxv);
            }
    return out;
}

void write_image_srgb(const std::string& path, const RealField& img) {
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("write_image_srgb: expected 1 or 3 channels");
    std::vector<uint8_t> pix(static_cast<size_t>(img.width) * img.height * img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                const double s = linear_to_srgb(img.at(c, y, x));
                pix[(static_cast<size_t>(y) * img.width + x) * img.channels + c] =
                    static_cast<uint8_t>(std::lround(s * 255.0));
            }
    if (img.channels == 1)
        write_png_gray8(path, pix, img.width, img.height);
    else
        write_png_rgb8(path, pix, img.width, img.height);
}

RealField read_depth(const std::string& path) {
    const PngImage img = read_png(path);
    if (img.channels != 1) throw std::runtime_error(path + ": depth must be grayscale");
    const double maxv = img.bit_depth == 16 ? 65535.0 : 255.0;
    RealField out(1, img.height, img.width);
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] = img.samples[i] / maxv;
    return out;
}

void write_depth_png(const std::string& path, const RealField& depth, int bit_depth) {
    if (depth.channels != 1) throw std::invalid_argument("write_depth_png: depth must be 1-channel");
    const size_t n = depth.values.size();
    if (bit_depth == 8) {
        std::vector<uint8_t> pix(n);
        for (size_t i = 0; i < n; ++i)
            pix[i] = static_cast<uint8_t>(std::lround(std::clamp(depth.values[i], 0.0, 1.0) * 255.0));
        write_png_gray8(path, pix, depth.width, depth.height);
    } else if (bit_depth == 16) {
        std::vector<uint16_t> pix(n);
        for (size_t i = 0; i < n; ++i)
            pix[i] =
                static_cast<uint16_t>(std::lround(std::clamp(depth.values[i], 0.0, 1.0) * 65535.0));
        write_png_gray16(path, pix, depth.width, depth.height);
    } else {
        throw std::invalid_argument("write_depth_png: bit depth must be 8 or 16");
    }
}

void write_phase_png(const std::string& path, const RealField& phase, int channel) {
    if (channel < 0 || channel >= phase.channels)
        throw std::invalid_argument("write_phase_png: channel out of range");
    std::vector<uint8_t> pix(static_cast<size_t>(phase.width) * phase.height);
    for (int y = 0; y < phase.height; ++y)
        for (int x = 0; x < phase.width; ++x) {
            const double p = phase.at(channel, y, x);
            int q = static_cast<int>(std::floor(p / kTwoPi * 256.0));
            q = std::clamp(q, 0, 255);
            pix[static_cast<size_t>(y) * phase.width + x] = static_cast<uint8_t>(q);
        }
    write_png_gray8(path, pix, phase.width, phase.height);
}

RealField read_phase_png(const std::string& path) {
    const PngImage img = read_png(path);
    if (img.channels != 1 || img.bit_depth != 8)
        throw std::runtime_error(path + ": expected 8-bit grayscale phase raster");
    RealField out(1, img.height, img.width);
    for (size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = (img.samples[i] + 0.5) * kTwoPi / 256.0;
    return out;
}

}  // namespace holo
