#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <sstream>

#include "agvsb/orders.hpp"

using namespace agvsb;

namespace {

const GridMap& medium() {
  static const GridMap map = generate_layout(WarehouseScale::Medium, 2);
  return map;
}

const char* kHeader = "ID,Warehouse block,Customer rating,Price of the product,Weight of the product\n";

}  // namespace

TEST_CASE("customer rating to class") {
  CHECK(class_from_rating(1) == PriorityClass::A);
  CHECK(class_from_rating(2) == PriorityClass::B);
  CHECK(class_from_rating(3) == PriorityClass::C);
  CHECK(class_from_rating(4) == PriorityClass::D);
  CHECK(class_from_rating(5) == PriorityClass::D);
  CHECK_THROWS_AS(class_from_rating(0), ValidationError);
  CHECK_THROWS_AS(class_from_rating(6), ValidationError);
  CHECK(parse_class(" c ") == PriorityClass::C);
  CHECK_THROWS_AS(parse_class("E"), ValidationError);
}

TEST_CASE("ingest a small shipping file") {
  std::istringstream in(std::string(kHeader) +
                        "1,A,1,177,1001\n"
                        "2,F,5,216,7846\n"
                        "3,\"C\",3,250,2500\n");
  const auto res = ingest_csv(in, medium(), {0, 5}, DeadlineWindows{}, 1);
  const auto& orders = res.stream.orders;
  REQUIRE(orders.size() == 3);
  CHECK(res.warnings.empty());
  CHECK(orders[0].cls == PriorityClass::A);
  CHECK(orders[1].cls == PriorityClass::D);
  CHECK(orders[2].cls == PriorityClass::C);
  CHECK(orders[0].weightKg == doctest::Approx(1.001));
  CHECK(orders[0].arrival == 0.0);
  CHECK(medium().zoneOf(orders[0].pickup) == Zone::A);
  CHECK(medium().zoneOf(orders[1].pickup) == Zone::F);
  CHECK(medium().zoneOf(orders[2].pickup) == Zone::C);
  CHECK(orders[0].deadline == doctest::Approx(3600.0));
  CHECK(orders[1].deadlineOffset() == doctest::Approx(4 * 3600.0));
  for (std::size_t i = 1; i < orders.size(); ++i) {
    CHECK(orders[i].arrival >= orders[i - 1].arrival);
    CHECK(orders[i].arrival - orders[i - 1].arrival <= 5.0);
  }
  CHECK(res.stream.horizon == orders.back().arrival);
}

TEST_CASE("header matching ignores case, order and punctuation") {
  std::istringstream in(
      "\xEF\xBB\xBF" "weight_in_gms,customer_rating,Mode_of_Shipment,ID,WAREHOUSE_BLOCK,Cost_of_the_Product\n"
      "2000,2,Ship,7,B,150\n");
  const auto res = ingest_csv(in, medium(), {0, 5}, DeadlineWindows{});
  REQUIRE(res.stream.orders.size() == 1);
  CHECK(res.stream.orders[0].id == 7);
  CHECK(res.stream.orders[0].cls == PriorityClass::B);
  CHECK(res.stream.orders[0].price == 150.0);
  CHECK(res.stream.orders[0].weightKg == doctest::Approx(2.0));
}

TEST_CASE("ingest errors carry the row number") {
  {
    std::istringstream in(std::string(kHeader) + "1,A,1,177,1001\n2,A,1,abc,1001\n");
    try {
      ingest_csv(in, medium(), {0, 5}, DeadlineWindows{});
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.row() == 3);
    }
  }
  {
    std::istringstream in("ID,Warehouse block,Customer rating\n1,A,1\n");
    CHECK_THROWS_AS(ingest_csv(in, medium(), {0, 5}, DeadlineWindows{}), ParseError);
  }
  {
    std::istringstream in(std::string(kHeader) + "1,Q,1,177,1001\n");
    CHECK_THROWS_AS(ingest_csv(in, medium(), {0, 5}, DeadlineWindows{}), ParseError);
  }
  {
    std::istringstream in(std::string(kHeader) + "1,A,9,177,1001\n");
    CHECK_THROWS_AS(ingest_csv(in, medium(), {0, 5}, DeadlineWindows{}), ParseError);
  }
  {
    std::istringstream in(std::string(kHeader) + "1,A,1\n");
    CHECK_THROWS_AS(ingest_csv(in, medium(), {0, 5}, DeadlineWindows{}), ParseError);
  }
}

TEST_CASE("out-of-range weight or price only warns") {
  std::istringstream in(std::string(kHeader) + "1,A,1,50,1001\n2,A,1,200,9000\n");
  const auto res = ingest_csv(in, medium(), {0, 5}, DeadlineWindows{});
  CHECK(res.stream.orders.size() == 2);
  CHECK(res.warnings.size() == 2);
}

TEST_CASE("synthesized streams") {
  const auto allA = synthesize_stream(100, medium(), {1, 0, 0, 0}, {0, 5}, DeadlineWindows{}, 3);
  for (const auto& o : allA.orders) CHECK(o.cls == PriorityClass::A);

  const auto burst = synthesize_stream(1000, medium(), kDefaultClassMix, {0, 0}, DeadlineWindows{}, 3);
  for (const auto& o : burst.orders) CHECK(o.arrival == 0.0);

  const auto s = synthesize_stream(1000, medium(), kDefaultClassMix, {0, 5}, DeadlineWindows{}, 3);
  const double meanGap = s.orders.back().arrival / 999.0;
  CHECK(meanGap == doctest::Approx(2.5).epsilon(0.2 / 2.5));

  std::array<int, 6> zoneHits{};
  for (const auto& o : s.orders) {
    CHECK(o.weightKg >= kMinWeightKg);
    CHECK(o.weightKg <= kMaxWeightKg);
    CHECK(o.price >= kMinPrice);
    CHECK(o.price <= kMaxPrice);
    CHECK(o.deadline > o.arrival);
    ++zoneHits[static_cast<std::size_t>(*medium().zoneOf(o.pickup))];
  }
  for (std::size_t z = 0; z < 5; ++z) CHECK(zoneHits[5] > zoneHits[z]);

  CHECK(synthesize_stream(50, medium(), kDefaultClassMix, {0, 5}, DeadlineWindows{}, 9).orders ==
        synthesize_stream(50, medium(), kDefaultClassMix, {0, 5}, DeadlineWindows{}, 9).orders);

  CHECK_THROWS_AS(synthesize_stream(10, medium(), {0.5, 0.5, 0.5, 0}, {0, 5}, DeadlineWindows{}, 1),
                  ValidationError);
  CHECK_THROWS_AS(synthesize_stream(10, medium(), {1.2, -0.2, 0, 0}, {0, 5}, DeadlineWindows{}, 1),
                  ValidationError);
  CHECK_THROWS_AS(synthesize_stream(0, medium(), kDefaultClassMix, {0, 5}, DeadlineWindows{}, 1),
                  ValidationError);
  CHECK_THROWS_AS(synthesize_stream(10, medium(), kDefaultClassMix, {5, 1}, DeadlineWindows{}, 1),
                  ValidationError);
}

TEST_CASE("class deadline ordering and arrival monotonicity hold for every window") {
  for (const Interval owt : {Interval{0, 0}, Interval{0, 2}, Interval{1, 8}, Interval{3, 3}}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto s = synthesize_stream(300, medium(), kDefaultClassMix, owt, DeadlineWindows{}, seed);
      double maxA = 0.0, minOther = 1e300;
      for (std::size_t i = 0; i < s.orders.size(); ++i) {
        const auto& o = s.orders[i];
        if (i > 0) CHECK(o.arrival >= s.orders[i - 1].arrival);
        if (o.cls == PriorityClass::A) maxA = std::max(maxA, o.deadlineOffset());
        else minOther = std::min(minOther, o.deadlineOffset());
        if (o.cls == PriorityClass::B) CHECK(o.deadlineOffset() <= 4 * 3600.0);
      }
      CHECK(maxA <= minOther);
    }
  }
  DeadlineWindows bad;
  bad.hours = {3, 2, 4, 4};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("stream dump round trip") {
  std::istringstream in(std::string(kHeader) + "1,A,1,177,1001\n2,F,5,216,7846\n3,E,4,99.5,3333\n");
  const auto first = ingest_csv(in, medium(), {0, 5}, DeadlineWindows{}, 4).stream;
  std::ostringstream dump;
  write_stream_csv(dump, first);
  std::istringstream back(dump.str());
  const auto second = read_stream_csv(back);
  CHECK(second.orders == first.orders);
  std::ostringstream again;
  write_stream_csv(again, second);
  CHECK(again.str() == dump.str());

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = synthesize_stream(200, medium(), kDefaultClassMix, {0, 7}, DeadlineWindows{}, seed);
    std::ostringstream out;
    write_stream_csv(out, s);
    std::istringstream rin(out.str());
    CHECK(read_stream_csv(rin).orders == s.orders);
  }

  std::istringstream broken("id,x,y,t_o,t_dd,weight_kg,price,class\n1,2,3,0,10,1.5,100,Z\n");
  CHECK_THROWS_AS(read_stream_csv(broken), ParseError);
}

TEST_CASE("class profiles") {
  const ProfileParams defaults;
  CHECK(delay_profile_for(PriorityClass::A, defaults).kind == DelayKind::Expedite);
  CHECK(delay_profile_for(PriorityClass::B, defaults).kind == DelayKind::FixedDate);
  CHECK(delay_profile_for(PriorityClass::C, defaults).kind == DelayKind::StandardUrgency);
  CHECK(delay_profile_for(PriorityClass::D, defaults).kind == DelayKind::Intangible);
  const auto b = delay_profile_for(PriorityClass::B, defaults);
  CHECK(delay_cost(b, 0.0) == 0.0);
  CHECK(delay_cost(b, b.deadlineOffset - 1e-3) == 0.0);

  ProfileParams bad;
  bad.caps = {0.5, 1.0, 1.0, 2.0};
  CHECK_THROWS_AS(delay_profile_for(PriorityClass::A, bad), ValidationError);
  bad.caps = {2.0, 1.5, 1.0, 0.5};
  bad.saturationFactor = 1.0;
  CHECK_THROWS_AS(ProfileSet{bad}, ValidationError);

  const ProfileSet set(defaults);
  Order o;
  o.cls = PriorityClass::D;
  o.arrival = 10;
  o.deadline = 10 + 4 * 3600.0;
  CHECK(set.forOrder(o).deadlineOffset == set[PriorityClass::D].deadlineOffset);
  o.deadline = 10 + 100;
  const auto shifted = set.forOrder(o);
  CHECK(shifted.deadlineOffset == doctest::Approx(100));
  CHECK(shifted.saturationTime == doctest::Approx(200));
  CHECK(delay_cost(shifted, 200) == doctest::Approx(0.5));
}
