#pragma once

#include "causalcast/ingest.hpp"
#include "causalcast/selectors.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace causalcast::selectors {

struct SelectorContext {
  std::uint64_t seed = 0;
  Deadline deadline;
  const ingest::RegimeCalendar* calendar = nullptr;  // needed only for calendar environments
};

/// Uniform entry point used by the backtest engine. `design` is build_design(train, p).
class Selector {
 public:
  virtual ~Selector() = default;
  virtual const std::string& id() const noexcept = 0;
  virtual FeatureSet select(const AlignedPanel& train, const DesignMatrix& design,
                            const SelectorContext& context) const = 0;
};

/// granger, seqicp, varlingam, dynotears, pcmci, sfs, fixed, none.
const std::vector<std::string>& known_selectors();

/// Unknown ids raise BadName; unknown or mistyped params raise ConfigError.
std::unique_ptr<Selector> make_selector(const std::string& id, const nlohmann::json& params, int p);

}  // namespace causalcast::selectors
