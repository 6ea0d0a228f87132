#include "causalcast/error.hpp"
#include "causalcast/selectors.hpp"

#include <algorithm>

namespace causalcast::selectors {

bool FeatureSet::contains(const std::string& name) const {
  return std::find(selected.begin(), selected.end(), name) != selected.end();
}

std::vector<Eigen::Index> FeatureSet::indices_in(const std::vector<std::string>& names) const {
  std::vector<Eigen::Index> out;
  for (const auto& s : selected) {
    auto it = std::find(names.begin(), names.end(), s);
    if (it == names.end()) throw Error(ErrorKind::BadName, "selected feature '" + s + "' not in panel");
    out.push_back(static_cast<Eigen::Index>(it - names.begin()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Deadline Deadline::after(double seconds) {
  Deadline d;
  if (seconds > 0.0)
    d.at_ = std::chrono::steady_clock::now() +
            std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(seconds));
  return d;
}

bool Deadline::expired() const {
  return at_ != std::chrono::steady_clock::time_point::max() && std::chrono::steady_clock::now() > at_;
}

void Deadline::check(const char* where) const {
  if (expired()) throw Error(ErrorKind::Timeout, std::string(where) + " exceeded its time budget");
}

}  // namespace causalcast::selectors
