#include "agvsb/orders.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "agvsb/csv.hpp"

namespace agvsb {

char class_letter(PriorityClass c) { return static_cast<char>('A' + static_cast<int>(c)); }

PriorityClass parse_class(std::string_view s) {
  const auto t = csv::trim(s);
  if (t.size() == 1) {
    const char ch = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
    if (ch >= 'A' && ch <= 'D') return static_cast<PriorityClass>(ch - 'A');
  }
  throw ValidationError("class", "unknown priority class '" + t + "'");
}

PriorityClass class_from_rating(int rating) {
  switch (rating) {
    case 1: return PriorityClass::A;
    case 2: return PriorityClass::B;
    case 3: return PriorityClass::C;
    case 4:
    case 5: return PriorityClass::D;
    default: throw ValidationError("rating", "customer rating must be 1..5, got " + std::to_string(rating));
  }
}

void DeadlineWindows::validate() const {
  for (std::size_t i = 0; i < kClassCount; ++i)
    if (!(hours[i] > 0.0)) throw ValidationError("dtw", "deadline offsets must be positive");
  for (std::size_t i = 1; i < kClassCount; ++i)
    if (hours[0] > hours[i])
      throw ValidationError("dtw", "class A offset must not exceed any other class offset");
}

void ProfileParams::validate() const {
  for (std::size_t i = 0; i < kClassCount; ++i)
    if (!(caps[i] >= 0.0)) throw ValidationError("delay.caps", "caps must be non-negative");
  for (std::size_t i = 1; i < kClassCount; ++i)
    if (caps[i - 1] < caps[i])
      throw ValidationError("delay.caps", "caps must satisfy C_A >= C_B >= C_C >= C_D");
  if (!(saturationFactor > 1.0))
    throw ValidationError("delay.saturation_factor", "must exceed 1 so T_u lies after the deadline");
  dtw.validate();
}

namespace {

DelayCostProfile make_profile(PriorityClass cls, double cap, double offset, double factor) {
  DelayCostProfile p;
  p.cap = cap;
  p.deadlineOffset = offset;
  switch (cls) {
    case PriorityClass::A:
      p.kind = DelayKind::Expedite;
      p.saturationTime = offset;
      break;
    case PriorityClass::B:
      p.kind = DelayKind::FixedDate;
      p.saturationTime = offset;
      break;
    case PriorityClass::C:
      p.kind = DelayKind::StandardUrgency;
      p.saturationTime = factor * offset;
      // exp(lambda * late) - 1 reaches the cap exactly at T_u.
      p.lambda = std::log1p(cap) / (p.saturationTime - offset);
      break;
    case PriorityClass::D:
      p.kind = DelayKind::Intangible;
      p.saturationTime = factor * offset;
      p.lambda = cap / (p.saturationTime - offset);
      break;
  }
  return p;
}

}  // namespace

DelayCostProfile delay_profile_for(PriorityClass cls, const ProfileParams& params) {
  params.validate();
  const auto i = static_cast<std::size_t>(cls);
  return make_profile(cls, params.caps[i], params.dtw.offsetSeconds(cls), params.saturationFactor);
}

ProfileSet::ProfileSet(const ProfileParams& params) {
  params.validate();
  for (std::size_t i = 0; i < kClassCount; ++i)
    byClass[i] = delay_profile_for(static_cast<PriorityClass>(i), params);
}

DelayCostProfile ProfileSet::forOrder(const Order& o) const {
  const auto& base = (*this)[o.cls];
  if (o.deadlineOffset() == base.deadlineOffset) return base;
  const double factor = base.deadlineOffset > 0 ? base.saturationTime / base.deadlineOffset : 2.0;
  return make_profile(o.cls, base.cap, o.deadlineOffset(), std::max(factor, 1.0 + 1e-9));
}

namespace {

double draw_gap(Rng& rng, Interval owt) {
  if (owt.hi <= owt.lo) return owt.lo;
  return uniform_real(rng, owt.lo, owt.hi);
}

// Index of the bucket containing u under cumulative weights.
template <typename WeightOf>
std::size_t pick_bucket(double u, WeightOf&& weightOf, std::size_t count) {
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    acc += weightOf(i);
    if (u < acc) return i;
  }
  return count - 1;
}

void check_interval(Interval owt) {
  if (!(owt.lo >= 0.0) || !(owt.hi >= owt.lo))
    throw ValidationError("owt", "inter-arrival window must satisfy 0 <= lo <= hi");
}

enum Column { kId, kBlock, kRating, kPrice, kWeight, kColumnCount };

std::optional<Column> match_header(const std::string& key) {
  static const std::map<std::string, Column> aliases{
      {"id", kId},
      {"warehouseblock", kBlock},
      {"customerrating", kRating},
      {"priceoftheproduct", kPrice},
      {"costoftheproduct", kPrice},
      {"weightoftheproduct", kWeight},
      {"weightingms", kWeight},
  };
  const auto it = aliases.find(key);
  if (it == aliases.end()) return std::nullopt;
  return it->second;
}

}  // namespace

IngestResult ingest_csv(std::istream& in, const GridMap& map, Interval owt,
                        const DeadlineWindows& dtw, std::uint64_t seed) {
  check_interval(owt);
  dtw.validate();
  IngestResult result;
  result.stream.owt = owt;

  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = csv::split(line);
  std::array<std::size_t, kColumnCount> colIndex;
  colIndex.fill(static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < header.size(); ++i)
    if (auto c = match_header(csv::normalize_key(header[i]))) colIndex[*c] = i;
  static constexpr std::array<const char*, kColumnCount> names{
      "ID", "Warehouse block", "Customer rating", "Price of the product", "Weight of the product"};
  for (std::size_t c = 0; c < kColumnCount; ++c)
    if (colIndex[c] == static_cast<std::size_t>(-1))
      throw ParseError(1, std::string("missing column '") + names[c] + "'");

  Rng rng(seed);
  double clock = 0.0;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split(line);
    auto field = [&](Column c) -> const std::string& {
      if (colIndex[c] >= fields.size()) throw ParseError(row, std::string("missing field '") + names[c] + "'");
      return fields[colIndex[c]];
    };
    const auto id = csv::parse_int(field(kId));
    if (!id || *id <= 0) throw ParseError(row, "ID must be a positive integer");
    const auto rating = csv::parse_int(field(kRating));
    if (!rating || *rating < 1 || *rating > 5) throw ParseError(row, "customer rating must be 1..5");
    const auto price = csv::parse_double(field(kPrice));
    if (!price) throw ParseError(row, "price is not a number");
    const auto grams = csv::parse_double(field(kWeight));
    if (!grams) throw ParseError(row, "weight is not a number");
    const auto block = csv::trim(field(kBlock));
    std::optional<Zone> zone;
    if (block.size() == 1) zone = zone_from_letter(block[0]);
    if (!zone) throw ParseError(row, "unknown warehouse block '" + block + "'");

    Order o;
    o.id = static_cast<OrderId>(*id);
    o.cls = class_from_rating(static_cast<int>(*rating));
    o.price = *price;
    o.weightKg = *grams / 1000.0;
    if (o.weightKg < kMinWeightKg || o.weightKg > kMaxWeightKg)
      result.warnings.push_back("row " + std::to_string(row) + ": weight " +
                                csv::shortest(o.weightKg) + " kg outside dataset range");
    if (o.price < kMinPrice || o.price > kMaxPrice)
      result.warnings.push_back("row " + std::to_string(row) + ": price " + csv::shortest(o.price) +
                                " outside dataset range");
    if (map.zoneCells(*zone).empty())
      throw ParseError(row, std::string("warehouse block '") + block + "' has no cells in this layout");
    o.pickup = storage_coordinate(map, *zone, rng);
    if (!result.stream.orders.empty()) clock += draw_gap(rng, owt);
    o.arrival = clock;
    o.deadline = clock + dtw.offsetSeconds(o.cls);
    result.stream.orders.push_back(o);
  }
  result.stream.horizon = clock;
  return result;
}

IngestResult ingest_csv(const std::filesystem::path& path, const GridMap& map, Interval owt,
                        const DeadlineWindows& dtw, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ValidationError("orders.file", "cannot open " + path.string());
  return ingest_csv(in, map, owt, dtw, seed);
}

OrderStream synthesize_stream(std::size_t n, const GridMap& map, const ClassMix& classMix,
                              Interval owt, const DeadlineWindows& dtw, std::uint64_t seed) {
  if (n == 0) throw ValidationError("orders", "order count must be at least 1");
  double total = 0.0;
  for (const double p : classMix) {
    if (!(p >= 0.0)) throw ValidationError("class_mix", "proportions must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("class_mix", "proportions must sum to 1");
  check_interval(owt);
  dtw.validate();

  // High-demand zone F gets a larger share; A-E share the rest evenly.
  std::vector<std::pair<Zone, double>> zoneWeights;
  for (const Zone z : kAllZones)
    if (!map.zoneCells(z).empty()) zoneWeights.emplace_back(z, z == Zone::F ? 0.30 : 0.14);
  if (zoneWeights.empty()) throw ValidationError("layout", "map has no storage cells");
  double zoneTotal = 0.0;
  for (const auto& [z, w] : zoneWeights) zoneTotal += w;

  Rng rng(seed);
  OrderStream stream;
  stream.owt = owt;
  double clock = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Order o;
    o.id = static_cast<OrderId>(i + 1);
    if (i > 0) clock += draw_gap(rng, owt);
    o.arrival = clock;
    const auto ci = pick_bucket(uniform01(rng), [&](std::size_t k) { return classMix[k]; }, kClassCount);
    o.cls = static_cast<PriorityClass>(ci);
    o.deadline = clock + dtw.offsetSeconds(o.cls);
    const auto zi = pick_bucket(uniform01(rng) * zoneTotal,
                         [&](std::size_t k) { return zoneWeights[k].second; }, zoneWeights.size());
    o.pickup = storage_coordinate(map, zoneWeights[zi].first, rng);
    o.weightKg = uniform_real(rng, kMinWeightKg, kMaxWeightKg);
    o.price = uniform_real(rng, kMinPrice, kMaxPrice);
    stream.orders.push_back(o);
  }
  stream.horizon = clock;
  return stream;
}

void write_stream_csv(std::ostream& out, const OrderStream& stream) {
  out << "id,x,y,t_o,t_dd,weight_kg,price,class\n";
  for (const auto& o : stream.orders) {
    out << o.id << ',' << o.pickup.x << ',' << o.pickup.y << ',' << csv::shortest(o.arrival) << ','
        << csv::shortest(o.deadline) << ',' << csv::shortest(o.weightKg) << ','
        << csv::shortest(o.price) << ',' << class_letter(o.cls) << '\n';
  }
}

OrderStream read_stream_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header row");
  if (csv::normalize_key(line) != "idxytotddweightkgpriceclass")
    throw ParseError(1, "expected header id,x,y,t_o,t_dd,weight_kg,price,class");
  OrderStream stream;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 8) throw ParseError(row, "expected 8 fields");
    Order o;
    const auto id = csv::parse_int(f[0]);
    const auto x = csv::parse_int(f[1]);
    const auto y = csv::parse_int(f[2]);
    const auto to = csv::parse_double(f[3]);
    const auto tdd = csv::parse_double(f[4]);
    const auto w = csv::parse_double(f[5]);
    const auto p = csv::parse_double(f[6]);
    if (!id || !x || !y || !to || !tdd || !w || !p) throw ParseError(row, "malformed numeric field");
    o.id = static_cast<OrderId>(*id);
    o.pickup = {static_cast<int>(*x), static_cast<int>(*y)};
    o.arrival = *to;
    o.deadline = *tdd;
    o.weightKg = *w;
    o.price = *p;
    try {
      o.cls = parse_class(f[7]);
    } catch (const ValidationError& e) {
      throw ParseError(row, e.what());
    }
    if (!stream.orders.empty() && o.arrival < stream.orders.back().arrival)
      throw ParseError(row, "arrivals must be nondecreasing");
    stream.orders.push_back(o);
  }
  stream.horizon = stream.orders.empty() ? 0.0 : stream.orders.back().arrival;
  return stream;
}

}  // namespace agvsb
