#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "stlisa/aggregation.hpp"

using namespace stlisa;
using CL = ClusterLabel;

namespace {

AggregateAssignment agg(std::vector<CL> labels) { return aggregate_color(labels); }

double dist2(Rgb a, Rgb b) {
  const double dr = a.r - b.r, dg = a.g - b.g, db = a.b - b.b;
  return dr * dr + dg * dg + db * db;
}

CL mirror(CL l) {
  switch (l) {
    case CL::HighHigh: return CL::LowLow;
    case CL::LowLow: return CL::HighHigh;
    case CL::HotSpot: return CL::ColdSpot;
    case CL::ColdSpot: return CL::HotSpot;
    case CL::HighLow: return CL::LowHigh;
    case CL::LowHigh: return CL::HighLow;
    default: return l;
  }
}

}  // namespace

TEST(Membership, Groups) {
  EXPECT_EQ(high_low_membership(CL::HighHigh), Membership::High);
  EXPECT_EQ(high_low_membership(CL::HotSpot), Membership::High);
  EXPECT_EQ(high_low_membership(CL::ColdSpot), Membership::Low);
  EXPECT_EQ(high_low_membership(CL::NotSignificant), Membership::Neutral);
  EXPECT_EQ(high_low_membership(CL::NoNeighbors), Membership::Neutral);
  EXPECT_EQ(high_low_membership(CL::NegativeSA), Membership::Other);
}

TEST(CoreGroup, Cases) {
  std::vector<CL> major{CL::HighHigh, CL::ColdSpot, CL::NotSignificant};
  std::vector<CL> minor{CL::LowHigh, CL::HotSpot, CL::NotSignificant};
  std::vector<CL> minor_low{CL::HighLow, CL::ColdSpot};
  std::vector<CL> ns(3, CL::NotSignificant);
  std::vector<CL> nodata(3, CL::NoData);
  std::vector<CL> other{CL::NegativeSA, CL::NotSignificant};
  std::vector<CL> high_with_hl{CL::HighHigh, CL::HighLow};
  EXPECT_EQ(core_group(major), CoreGroup::MajorConflict);
  EXPECT_EQ(core_group(minor), CoreGroup::MinorConflict);
  EXPECT_EQ(core_group(minor_low), CoreGroup::MinorConflict);
  EXPECT_EQ(core_group(ns), CoreGroup::NoneSignificant);
  EXPECT_EQ(core_group(nodata), CoreGroup::NoData);
  EXPECT_EQ(core_group(other), CoreGroup::OtherOnly);
  EXPECT_EQ(core_group(high_with_hl), CoreGroup::HighCluster);
  EXPECT_THROW(core_group(std::vector<CL>{}), InputError);
}

TEST(Disagreement, Values) {
  EXPECT_EQ(disagreement(CoreGroup::HighCluster, CL::HighHigh), 0.0);
  EXPECT_EQ(disagreement(CoreGroup::HighCluster, CL::OtherPositive), 0.5);
  EXPECT_EQ(disagreement(CoreGroup::HighCluster, CL::NotSignificant), 1.0);
  EXPECT_EQ(disagreement(CoreGroup::LowCluster, CL::ColdSpot), 0.0);
  EXPECT_THROW(disagreement(CoreGroup::HighCluster, CL::ColdSpot), InputError);
  EXPECT_THROW(disagreement(CoreGroup::HighCluster, CL::LowHigh), InputError);
  EXPECT_THROW(disagreement(CoreGroup::MajorConflict, CL::HighHigh), InputError);
}

TEST(Palette, HexRoundTrip) {
  EXPECT_EQ(to_hex(Rgb{178, 24, 43}), "#b2182b");
  EXPECT_EQ(parse_hex("#b2182b"), (Rgb{178, 24, 43}));
  EXPECT_THROW(parse_hex("b2182b"), InputError);
}

// Reference categories of the aggregate scheme with the default palette.
TEST(AggregateCases, CoreGroupsAndColors) {
  const PaletteConfig p;
  auto a = agg({CL::HighHigh, CL::HotSpot, CL::HighHigh});
  EXPECT_EQ(a.core, CoreGroup::HighCluster);
  EXPECT_EQ(a.h, 0.0);
  EXPECT_EQ(a.color, p.high_cluster);

  auto b = agg({CL::LowLow, CL::ColdSpot, CL::LowLow});
  EXPECT_EQ(b.core, CoreGroup::LowCluster);
  EXPECT_EQ(b.color, p.low_cluster);

  auto c = agg({CL::HighHigh, CL::HotSpot, CL::NotSignificant});
  EXPECT_DOUBLE_EQ(c.h, 1.0 / 3.0);
  EXPECT_EQ(c.color, (Rgb{193, 91, 103}));

  auto d = agg({CL::HighHigh, CL::NotSignificant, CL::NotSignificant});
  EXPECT_DOUBLE_EQ(d.h, 2.0 / 3.0);
  EXPECT_EQ(d.color, (Rgb{209, 157, 164}));

  auto e = agg({CL::LowLow, CL::ColdSpot, CL::OtherPositive});
  EXPECT_DOUBLE_EQ(e.h, 0.5 / 3.0);
  EXPECT_EQ(e.color, (Rgb{65, 122, 181}));

  EXPECT_EQ(agg({CL::LowHigh, CL::HotSpot, CL::NotSignificant}).color, p.minor_conflict);
  EXPECT_EQ(agg({CL::HighHigh, CL::ColdSpot, CL::NotSignificant}).color, p.major_conflict);
  EXPECT_EQ(agg({CL::HighHigh, CL::ColdSpot, CL::HotSpot}).color, p.major_conflict);
  EXPECT_EQ(agg({CL::NegativeSA, CL::NotSignificant, CL::NotSignificant}).core, CoreGroup::OtherOnly);
  EXPECT_EQ(agg({CL::HighLow, CL::NotSignificant, CL::NotSignificant}).color, p.other_only);
  EXPECT_EQ(agg({CL::NotSignificant, CL::NotSignificant, CL::NotSignificant}).color, p.not_significant);
  EXPECT_EQ(agg({CL::NoData, CL::NoData, CL::NoData}).color, p.no_data);
}

TEST(Property, HBoundsAndOrderInvariance) {
  const std::vector<CL> all{CL::HighHigh, CL::LowLow,      CL::HighLow,   CL::LowHigh,
                            CL::OtherPositive, CL::NegativeSA, CL::HotSpot, CL::ColdSpot,
                            CL::NotSignificant, CL::NoData,  CL::NoNeighbors};
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<CL> labels(1 + gen() % 4);
    for (auto& l : labels) l = all[gen() % all.size()];
    const auto a = aggregate_color(labels);
    EXPECT_GE(a.h, 0.0);
    EXPECT_LT(a.h, 1.0);
    if (a.core == CoreGroup::HighCluster) {
      const bool unanimous = std::all_of(labels.begin(), labels.end(), [](CL l) {
        return high_low_membership(l) == Membership::High;
      });
      EXPECT_EQ(a.h == 0.0, unanimous);
    }
    auto shuffled = labels;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    const auto b = aggregate_color(shuffled);
    EXPECT_EQ(a.core, b.core);
    EXPECT_EQ(a.h, b.h);
    EXPECT_EQ(a.color, b.color);

    std::vector<CL> mirrored;
    for (auto l : labels) mirrored.push_back(mirror(l));
    const auto m = aggregate_color(mirrored);
    EXPECT_EQ(m.h, a.h);
    if (a.core == CoreGroup::HighCluster) {
      EXPECT_EQ(m.core, CoreGroup::LowCluster);
      EXPECT_EQ(m.color, interpolate(PaletteConfig{}.low_cluster, PaletteConfig{}.not_significant, a.h));
    }
  }
}

TEST(Property, ColorApproachesGreyAsHGrows) {
  const PaletteConfig p;
  for (auto core : {p.high_cluster, p.low_cluster}) {
    double previous = dist2(core, p.not_significant) + 1.0;
    for (int k = 0; k <= 12; ++k) {
      const double h = k / 13.0;
      const double d = dist2(interpolate(core, p.not_significant, h), p.not_significant);
      EXPECT_LT(d, previous) << h;
      previous = d;
    }
  }
}
