#include "gazecap/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace gazecap {

RgbImage::RgbImage(int h, int w, std::uint8_t fill)
    : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, fill) {
    if (h <= 0 || w <= 0) throw InputError("image dimensions must be positive");
}

void RgbImage::set(int y, int x, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    at(y, x, 0) = r;
    at(y, x, 1) = g;
    at(y, x, 2) = b;
}

RgbImage flip_horizontal(const RgbImage& img) {
    RgbImage out(img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) out.at(y, img.width - 1 - x, c) = img.at(y, x, c);
        }
    }
    return out;
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& in) {
    std::string tok;
    while (in) {
        const int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    in >> tok;
    return tok;
}

int header_int(std::istream& in, const std::string& what, const std::filesystem::path& path) {
    const std::string tok = header_token(in);
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw InputError(path.string() + ": bad " + what + " '" + tok + "'");
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

RgbImage read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    if (header_token(in) != "P6") throw InputError(path.string() + ": not a binary PPM (P6)");
    const int w = header_int(in, "width", path);
    const int h = header_int(in, "height", path);
    const int maxval = header_int(in, "maxval", path);
    if (maxval != 255) throw InputError(path.string() + ": only maxval 255 is supported");
    in.get();  // single whitespace after maxval
    RgbImage img(h, w);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (!in) throw InputError(path.string() + ": truncated pixel data");
    return img;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
    auto out = open_out(path);
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
}

namespace {

void write_comment_lines(std::ostream& out, const std::string& comment) {
    std::istringstream lines(comment);
    for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
}

}  // namespace

void write_pgm8(const std::filesystem::path& path, const DenseMap& map, const std::string& comment) {
    auto out = open_out(path);
    out << "P5\n";
    write_comment_lines(out, comment);
    out << map.cols() << ' ' << map.rows() << "\n255\n";
    for (Index i = 0; i < map.size(); ++i) {
        const Real v = std::clamp(map.data()[i], 0.0, 1.0);
        out.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0))));
    }
}

void write_pgm16(const std::filesystem::path& path, const DenseMap& map, const std::string& comment) {
    auto out = open_out(path);
    out << "P5\n";
    write_comment_lines(out, comment);
    out << map.cols() << ' ' << map.rows() << "\n65535\n";
    for (Index i = 0; i < map.size(); ++i) {
        const Real v = std::clamp(map.data()[i], 0.0, 1.0);
        const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
        out.put(static_cast<char>(q >> 8));  // PGM 16-bit is big-endian
        out.put(static_cast<char>(q & 0xff));
    }
}

DenseMap read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    if (header_token(in) != "P5") throw InputError(path.string() + ": not a binary PGM (P5)");
    const int w = header_int(in, "width", path);
    const int h = header_int(in, "height", path);
    const int maxval = header_int(in, "maxval", path);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw InputError(path.string() + ": bad PGM header");
    in.get();
    DenseMap m(h, w);
    for (Index i = 0; i < m.size(); ++i) {
        int v = in.get();
        if (maxval > 255) v = (v << 8) | in.get();
        if (!in) throw InputError(path.string() + ": truncated pixel data");
        m.data()[i] = static_cast<Real>(v) / maxval;
    }
    return m;
}

void write_csv_grid(const std::filesystem::path& path, const DenseMap& map, const std::string& header_comment) {
    auto out = open_out(path);
    write_comment_lines(out, header_comment);
    out << std::setprecision(std::numeric_limits<Real>::max_digits10);
    for (Index r = 0; r < map.rows(); ++r) {
        for (Index c = 0; c < map.cols(); ++c) {
            if (c) out << ',';
            out << map(r, c);
        }
        out << '\n';
    }
}

DenseMap read_csv_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<std::vector<Real>> rows;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<Real> row;
        std::istringstream cells(line);
        for (std::string cell; std::getline(cells, cell, ',');) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size()) throw InputError(path.string() + ": ragged grid");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError(path.string() + ": empty grid");
    DenseMap m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
    return m;
}

namespace {

std::vector<Real> gaussian_kernel(Real sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<Real> k(static_cast<std::size_t>(radius) + 1);
    Real total = 0.0;
    for (int i = 0; i <= radius; ++i) {
        k[static_cast<std::size_t>(i)] = std::exp(-0.5 * i * i / (sigma * sigma));
        total += (i == 0 ? 1.0 : 2.0) * k[static_cast<std::size_t>(i)];
    }
    for (Real& v : k) v /= total;
    return k;
}

// Blur along rows (horizontal) of `in`; half-kernel `k`, clamped borders.
DenseMap blur_rows(const DenseMap& in, const std::vector<Real>& k) {
    DenseMap out(in.rows(), in.cols());
    const int w = static_cast<int>(in.cols());
    const int radius = static_cast<int>(k.size()) - 1;
    for (Index r = 0; r < in.rows(); ++r) {
        for (int x = 0; x < w; ++x) {
            Real acc = k[0] * in(r, x);
            for (int d = 1; d <= radius; ++d) {
                const int l = std::max(0, x - d);
                const int rr = std::min(w - 1, x + d);
                acc += k[static_cast<std::size_t>(d)] * (in(r, l) + in(r, rr));
            }
            out(r, x) = acc;
        }
    }
    return out;
}

}  // namespace

DenseMap gaussian_blur(const DenseMap& map, Real sigma) {
    if (sigma <= 0.0) return map;
    const auto k = gaussian_kernel(sigma);
    DenseMap horiz = blur_rows(map, k);
    DenseMap t = horiz.transpose();
    return blur_rows(t, k).transpose();
}

DenseMap resize_nearest(const DenseMap& map, int height, int width) {
    DenseMap out(height, width);
    for (int y = 0; y < height; ++y) {
        const auto sy = std::min<Index>(map.rows() - 1, static_cast<Index>(y) * map.rows() / height);
        for (int x = 0; x < width; ++x) {
            const auto sx = std::min<Index>(map.cols() - 1, static_cast<Index>(x) * map.cols() / width);
            out(y, x) = map(sy, sx);
        }
    }
    return out;
}

DenseMap resize_area(const DenseMap& map, int height, int width) {
    DenseMap out = DenseMap::Zero(height, width);
    const Real sy = static_cast<Real>(map.rows()) / height;
    const Real sx = static_cast<Real>(map.cols()) / width;
    for (int y = 0; y < height; ++y) {
        const Real y0 = y * sy;
        const Real y1 = (y + 1) * sy;
        for (int x = 0; x < width; ++x) {
            const Real x0 = x * sx;
            const Real x1 = (x + 1) * sx;
            Real acc = 0.0;
            for (auto r = static_cast<Index>(std::floor(y0)); r < std::min<Index>(map.rows(), static_cast<Index>(std::ceil(y1))); ++r) {
                const Real wy = std::min<Real>(y1, r + 1) - std::max<Real>(y0, r);
                for (auto c = static_cast<Index>(std::floor(x0)); c < std::min<Index>(map.cols(), static_cast<Index>(std::ceil(x1))); ++c) {
                    const Real wx = std::min<Real>(x1, c + 1) - std::max<Real>(x0, c);
                    acc += wy * wx * map(r, c);
                }
            }
            out(y, x) = acc / (sy * sx);
        }
    }
    return out;
}

}  // namespace gazecap
