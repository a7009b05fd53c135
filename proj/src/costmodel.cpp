#include "agvsb/costmodel.hpp"

#include <algorithm>
#include <cmath>

namespace agvsb {

void CostParams::validate() const {
  auto nonNegative = [](double v, const char* field) {
    if (!(v >= 0.0)) throw ValidationError(field, "must be non-negative");
  };
  nonNegative(delta1, "cost.delta1");
  nonNegative(delta2, "cost.delta2");
  nonNegative(electricityPrice, "cost.ep");
  nonNegative(holdingRate, "cost.gamma");
  nonNegative(beta, "cost.beta");
  nonNegative(selfWeightKg, "cost.self_weight");
  if (uihc) nonNegative(*uihc, "cost.uihc");
  if (!(wt >= 0.0 && wt <= 1.0)) throw ValidationError("cost.wt", "must lie in [0, 1]");
  if (!(speed > 0.0)) throw ValidationError("cost.speed", "must be positive");
  if (!(batteryBudget > 0.0)) throw ValidationError("cost.battery_budget", "must be positive");
  if (!(payloadLimitKg > 0.0)) throw ValidationError("cost.payload_limit", "must be positive");
}

std::string_view delay_kind_name(DelayKind k) {
  switch (k) {
    case DelayKind::Expedite: return "expedite";
    case DelayKind::FixedDate: return "fixed-date";
    case DelayKind::StandardUrgency: return "standard-urgency";
    case DelayKind::Intangible: return "intangible";
  }
  return "?";
}

double power_unit(double carriedWeightKg, const CostParams& p) {
  return p.delta1 * carriedWeightKg + p.delta2;
}

double leg_energy(double carriedWeightKg, double distanceM, const CostParams& p) {
  return power_unit(carriedWeightKg, p) * (distanceM / p.speed) / 3600.0;
}

double waiting_time(double serviceStart, double request) {
  return std::max(0.0, serviceStart - request);
}

double delay_time(double waiting, double deadlineOffset) {
  return std::max(0.0, waiting - deadlineOffset);
}

double delay_cost(const DelayCostProfile& profile, double waiting) {
  if (waiting < profile.deadlineOffset) return 0.0;
  const double late = waiting - profile.deadlineOffset;
  switch (profile.kind) {
    case DelayKind::Expedite:
    case DelayKind::FixedDate:
      return profile.cap;
    case DelayKind::StandardUrgency:
      if (waiting >= profile.saturationTime) return profile.cap;
      return std::min(profile.cap, std::expm1(profile.lambda * late));
    case DelayKind::Intangible:
      if (waiting >= profile.saturationTime) return profile.cap;
      return std::min(profile.cap, profile.lambda * late);
  }
  return 0.0;
}

double unit_inventory_holding_cost(double holdingRate, double annualInventoryValue,
                                   double packageQuantity) {
  if (packageQuantity <= 0.0) return 0.0;
  return holdingRate * annualInventoryValue / (kMinutesPerYear * packageQuantity);
}

double inventory_cost(double waiting, const CostParams& p) {
  if (!p.uihc) throw ValidationError("cost.uihc", "unit holding cost not set");
  return *p.uihc * (waiting / 60.0);
}

double time_cost(std::span<const OrderServiceRecord> records, const CostParams& p) {
  double inventory = 0.0;
  double delay = 0.0;
  for (const auto& r : records) {
    inventory += r.inventoryCost;
    delay += r.delayCost;
  }
  return inventory + p.beta * delay;
}

double energy_cost(double totalEnergyWh, const CostParams& p) {
  return p.electricityPrice * totalEnergyWh;
}

double system_objective(double energyCost, double timeCost, double wt) {
  if (!(wt >= 0.0 && wt <= 1.0)) throw ValidationError("cost.wt", "must lie in [0, 1]");
  return wt * energyCost + (1.0 - wt) * timeCost;
}

}  // namespace agvsb
