#include "fedsched/app_model.hpp"

#include <set>
#include <stdexcept>

namespace fedsched {

RoundLimits round_limits(const FlApplication& app) {
  if (app.n_rounds < 1) throw std::invalid_argument("n_rounds must be >= 1");
  const i128 micro_dollars = div_round(app.budget.ticks, kTicksPerMicroDollar);
  return RoundLimits{
      Money::from_micro_dollars(static_cast<std::int64_t>(div_round(micro_dollars, app.n_rounds))),
      Micros{static_cast<std::int64_t>(div_round(app.deadline.us, app.n_rounds))},
  };
}

std::vector<Violation> validate_app(const FlApplication& app, const MultiCloudEnv& env) {
  std::vector<Violation> out;
  if (app.clients.empty()) out.push_back({"clients", "at least one client is required"});
  std::set<std::string> ids;
  for (const auto& c : app.clients) {
    const std::string cp = "clients." + c.id;
    if (c.id.empty()) out.push_back({cp, "empty client id"});
    if (!ids.insert(c.id).second) out.push_back({cp, "duplicate client id"});
    if (!env.find_region(c.dataset_location))
      out.push_back({cp + ".dataset_location", "unknown region '" + c.dataset_location.to_string() + "'"});
    if (c.baseline_train.us < 0) out.push_back({cp + ".baseline_train_seconds", "must be >= 0"});
    if (c.baseline_test.us < 0) out.push_back({cp + ".baseline_test_seconds", "must be >= 0"});
  }
  if (app.n_rounds < 1) out.push_back({"n_rounds", "must be >= 1"});
  if (app.epochs_per_round < 1) out.push_back({"epochs_per_round", "must be >= 1"});
  if (app.alpha.micro < 0 || app.alpha.micro > kMicro) out.push_back({"alpha", "must lie in [0, 1]"});
  if (app.budget.ticks <= 0) out.push_back({"budget", "must be positive"});
  if (app.deadline.us <= 0) out.push_back({"deadline_seconds", "must be positive"});
  if (app.baseline_comm_time.us < 0) out.push_back({"baseline_comm_seconds", "must be >= 0"});
  const auto& m = app.messages;
  if (m.server_train.n < 0 || m.server_aggreg.n < 0 || m.client_train.n < 0 || m.client_test.n < 0)
    out.push_back({"messages", "message sizes must be >= 0"});
  return out;
}

}  // namespace fedsched
