#include "gazecap/saliency.hpp"
#include "gazecap/synth.hpp"

#include <gtest/gtest.h>

#include <set>
#include <vector>

using namespace gazecap;

namespace {

RgbImage square_on_ground(int size, int side, std::uint8_t ground, std::uint8_t square) {
    RgbImage img(size, size, ground);
    const int o = (size - side) / 2;
    for (int y = o; y < o + side; ++y) {
        for (int x = o; x < o + side; ++x) img.set(y, x, square, square, square);
    }
    return img;
}

BooleanMap from_rows(const std::vector<std::string>& rows) {
    BooleanMap m(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
    for (std::size_t y = 0; y < rows.size(); ++y) {
        for (std::size_t x = 0; x < rows[y].size(); ++x) m(static_cast<Index>(y), static_cast<Index>(x)) = rows[y][x] == '1';
    }
    return m;
}

std::set<std::vector<std::uint8_t>> as_set(const std::vector<BooleanMap>& maps) {
    std::set<std::vector<std::uint8_t>> s;
    for (const auto& m : maps) s.emplace(m.data(), m.data() + m.size());
    return s;
}

}  // namespace

TEST(Saliency, ConstantImageHasNoSaliency) {
    const RgbImage img(16, 16, 90);
    for (const auto& m : boolean_maps(img, 8)) {
        const auto on = m.cast<int>().sum();
        EXPECT_TRUE(on == 0 || on == 256);
    }
    EXPECT_TRUE(bms_saliency(img).isZero());
}

TEST(Saliency, MapCountAndHandEnumeration) {
    EXPECT_EQ(boolean_maps(RgbImage(4, 4, 10), 128).size(), 12u);
    // White 2x2 block on black: only the intensity channel separates them;
    // both opponent channels sit at 127.5 everywhere.
    const RgbImage img = square_on_ground(4, 2, 0, 255);
    const BooleanMap block = from_rows({"0000", "0110", "0110", "0000"});
    const BooleanMap ring = from_rows({"1111", "1001", "1001", "1111"});
    const BooleanMap ones = BooleanMap::Ones(4, 4);
    const BooleanMap zeros = BooleanMap::Zero(4, 4);
    const std::vector<BooleanMap> want = {block, ring, block, ring, ones, zeros, zeros, ones, ones, zeros, zeros, ones};
    const auto got = boolean_maps(img, 128);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(got[i], want[i]) << "map " << i;
    EXPECT_THROW(boolean_maps(img, 0), InputError);
}

TEST(Saliency, Surroundedness) {
    EXPECT_TRUE(attention_from_map(BooleanMap::Zero(6, 6)).isZero());
    EXPECT_TRUE(attention_from_map(BooleanMap::Ones(6, 6)).isZero());
    const BooleanMap blob = from_rows({"000000", "001100", "001100", "000000"});
    EXPECT_EQ(attention_from_map(blob), (blob.cast<Real>() / 2.0).eval());
    const BooleanMap two = from_rows({
        "11000000",
        "11000000",
        "00000000",
        "00001110",
        "00001010",
        "00001110",
        "00000000",
        "00000000",
    });
    BooleanMap interior = two;
    interior.block(0, 0, 2, 2).setZero();
    const DenseMap att = attention_from_map(two);
    EXPECT_EQ(att, (interior.cast<Real>() / std::sqrt(8.0)).eval());
}

TEST(Saliency, CenteredSquareStandsOut) {
    const RgbImage img = square_on_ground(64, 20, 30, 220);
    const DenseMap s = bms_saliency(img);
    EXPECT_EQ(s.maxCoeff(), 1.0);
    EXPECT_GE(s.minCoeff(), 0.0);
    Real inside = 0.0, outside = 0.0;
    int n_in = 0, n_out = 0;
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            const bool in = y >= 22 && y < 42 && x >= 22 && x < 42;
            (in ? inside : outside) += s(y, x);
            (in ? n_in : n_out) += 1;
        }
    }
    EXPECT_GE(inside / n_in, 5.0 * outside / n_out);
}

TEST(Saliency, FlipEquivariance) {
    SynthOptions opt;
    for (int i = 0; i < 3; ++i) {
        const RgbImage img = generate_scene(i, opt).image;
        const DenseMap s = bms_saliency(img);
        EXPECT_EQ(bms_saliency(flip_horizontal(img)), s.rowwise().reverse().eval()) << "scene " << i;
    }
}

TEST(Saliency, ConstantShiftKeepsMapSetAtUnitStep) {
    RgbImage img(6, 6);
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 6; ++x) {
            img.set(y, x, static_cast<std::uint8_t>(40 + 7 * x), static_cast<std::uint8_t>(60 + 5 * y),
                    static_cast<std::uint8_t>(50 + 3 * ((x + y) % 4)));
        }
    }
    RgbImage shifted = img;
    for (auto& v : shifted.data) v = static_cast<std::uint8_t>(v + 30);
    EXPECT_EQ(as_set(boolean_maps(img, 1)), as_set(boolean_maps(shifted, 1)));
}
