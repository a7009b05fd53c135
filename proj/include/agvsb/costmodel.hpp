#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "agvsb/types.hpp"

namespace agvsb {

/// Battery calibration: 42 Ah x 24 V = 1008 Wh drained in 5 h at full load
/// (450 kg tare + 270 kg payload), so full-load draw is 201.6 W. One third of
/// that is taken as the load-independent term.
inline constexpr double kFullLoadPowerW = 1008.0 / 5.0;
inline constexpr double kDefaultDelta2W = kFullLoadPowerW / 3.0;
inline constexpr double kDefaultDelta1WPerKg = (kFullLoadPowerW - kDefaultDelta2W) / 720.0;
/// $/Wh, the CoE/E ratio printed in the published sensitivity tables.
inline constexpr double kDefaultElectricityPrice = 0.0120;
inline constexpr double kMinutesPerYear = 365.0 * 24.0 * 60.0;

struct CostParams {
  double delta1 = kDefaultDelta1WPerKg;  // W/kg
  double delta2 = kDefaultDelta2W;       // W
  double electricityPrice = kDefaultElectricityPrice;  // $/Wh
  double holdingRate = 0.25;             // gamma, annual
  /// $/min/package. When unset the simulator derives it from the stream.
  std::optional<double> uihc;
  double beta = 1.0;
  double wt = 0.5;
  double selfWeightKg = 450.0;
  double payloadLimitKg = 270.0;
  double speed = 1.0;             // m/s
  double batteryBudget = 18000.0;  // s of running time per charge

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

enum class DelayKind { Expedite, FixedDate, StandardUrgency, Intangible };
std::string_view delay_kind_name(DelayKind k);

/// Piecewise class delay-cost curve, evaluated on an order's waiting time.
struct DelayCostProfile {
  DelayKind kind = DelayKind::FixedDate;
  /// Rate for the linear kinds, exponent coefficient for StandardUrgency.
  double lambda = 0.0;
  double cap = 0.0;
  double deadlineOffset = 0.0;  // s, deadline minus arrival
  double saturationTime = 0.0;  // s, T_u, measured from arrival
};

/// Per-order service accounting.
struct OrderServiceRecord {
  OrderId orderId = 0;
  double waitingTime = 0.0;
  double travelTime = 0.0;
  double delayTime = 0.0;
  double orderEnergy = 0.0;    // Wh
  double inventoryCost = 0.0;  // $
  double delayCost = 0.0;      // $
};

double power_unit(double carriedWeightKg, const CostParams& p);
double leg_energy(double carriedWeightKg, double distanceM, const CostParams& p);
double waiting_time(double serviceStart, double request);
double delay_time(double waiting, double deadlineOffset);
double delay_cost(const DelayCostProfile& profile, double waiting);
/// gamma * annual inventory value / (minutes per year * package quantity).
double unit_inventory_holding_cost(double holdingRate, double annualInventoryValue,
                                   double packageQuantity);
/// Requires p.uihc to be set.
double inventory_cost(double waiting, const CostParams& p);
double time_cost(std::span<const OrderServiceRecord> records, const CostParams& p);
double energy_cost(double totalEnergyWh, const CostParams& p);
/// Convex combination; throws ValidationError when wt is outside [0, 1].
double system_objective(double energyCost, double timeCost, double wt);
/// Reported system cost: energy and time weighted equally and summed.
inline double reported_system_cost(double energyCost, double timeCost) {
  return 2.0 * system_objective(energyCost, timeCost, 0.5);
}

}  // namespace agvsb
