#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "agvsb/costmodel.hpp"
#include "agvsb/layout.hpp"

namespace agvsb {

/// External customer priority; A is the most urgent.
enum class PriorityClass : std::uint8_t { A, B, C, D };
inline constexpr std::size_t kClassCount = 4;

char class_letter(PriorityClass c);
PriorityClass parse_class(std::string_view s);
/// Customer rating 1..5 to class: 1->A, 2->B, 3->C, 4 and 5->D.
PriorityClass class_from_rating(int rating);

struct Order {
  OrderId id = 0;
  Cell pickup{};
  double arrival = 0.0;   // s
  double deadline = 0.0;  // s, absolute
  double weightKg = 0.0;
  double price = 0.0;  // $
  PriorityClass cls = PriorityClass::D;

  double deadlineOffset() const noexcept { return deadline - arrival; }
  friend bool operator==(const Order&, const Order&) = default;
};

/// Inter-arrival gap window in seconds.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Per-class deadline offsets, stored in hours as written in scenario files.
struct DeadlineWindows {
  std::array<double, kClassCount> hours{1.0, 2.0, 4.0, 4.0};

  double offsetSeconds(PriorityClass c) const {
    return hours[static_cast<std::size_t>(c)] * 3600.0;
  }
  /// Class A must not have a later deadline offset than any other class.
  void validate() const;
  friend bool operator==(const DeadlineWindows&, const DeadlineWindows&) = default;
};

struct OrderStream {
  std::vector<Order> orders;  // sorted by arrival
  Interval owt;
  double horizon = 0.0;  // last arrival, s
};

struct IngestResult {
  OrderStream stream;
  std::vector<std::string> warnings;
};

IngestResult ingest_csv(std::istream& in, const GridMap& map, Interval owt,
                        const DeadlineWindows& dtw, std::uint64_t seed = 0);
IngestResult ingest_csv(const std::filesystem::path& path, const GridMap& map, Interval owt,
                        const DeadlineWindows& dtw, std::uint64_t seed = 0);

using ClassMix = std::array<double, kClassCount>;
/// Equal shares for ratings 1..5, with ratings 4 and 5 both mapping to D.
inline constexpr ClassMix kDefaultClassMix{0.2, 0.2, 0.2, 0.4};

OrderStream synthesize_stream(std::size_t n, const GridMap& map, const ClassMix& classMix,
                              Interval owt, const DeadlineWindows& dtw, std::uint64_t seed);

/// Stream dump: id,x,y,t_o,t_dd,weight_kg,price,class with shortest
/// round-trip number formatting.
void write_stream_csv(std::ostream& out, const OrderStream& stream);
OrderStream read_stream_csv(std::istream& in);

/// Delay-curve parameters shared by all classes.
struct ProfileParams {
  std::array<double, kClassCount> caps{2.0, 1.5, 1.0, 0.5};
  DeadlineWindows dtw;
  /// T_u as a multiple of the class deadline offset.
  double saturationFactor = 2.0;

  void validate() const;
};

/// A->expedite, B->fixed date, C->standard urgency, D->intangible.
DelayCostProfile delay_profile_for(PriorityClass cls, const ProfileParams& params);

/// Class profiles indexed by PriorityClass.
struct ProfileSet {
  std::array<DelayCostProfile, kClassCount> byClass;
  explicit ProfileSet(const ProfileParams& params);
  const DelayCostProfile& operator[](PriorityClass c) const {
    return byClass[static_cast<std::size_t>(c)];
  }
  /// Profile for a specific order: class curve shifted to the order's own
  /// deadline offset (equal to the class offset for generated streams).
  DelayCostProfile forOrder(const Order& o) const;
};

// Published data ranges for dataset-sourced orders.
inline constexpr double kMinWeightKg = 1.001;
inline constexpr double kMaxWeightKg = 7.846;
inline constexpr double kMinPrice = 96.0;
inline constexpr double kMaxPrice = 310.0;

}  // namespace agvsb
