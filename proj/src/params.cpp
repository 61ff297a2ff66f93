#include "contam/params.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "contam/errors.hpp"

namespace contam {

ContaminationParams derive_params(double epsilon, double delta, double C, double C_eta) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ParameterDomainError("derive_params: epsilon must lie in (0,1)");
  }
  if (!(delta > 0.0)) {
    throw ParameterDomainError("derive_params: delta must be positive");
  }
  if (!(C >= 1.0) || !(C_eta >= 1.0)) {
    throw ParameterDomainError("derive_params: constants C and C_eta must be >= 1");
  }
  ContaminationParams p;
  p.epsilon = epsilon;
  p.delta = delta;
  p.C = C;
  p.C_eta = C_eta;
  p.B = std::log1p((epsilon / 2) / (1 - epsilon / 2)) / delta;
  p.gamma = std::log1p(epsilon / (1 - epsilon)) / delta;
  int k = static_cast<int>(std::ceil(C * p.gamma * p.gamma));
  if (k < 2) k = 2;
  if (k % 2 == 1) ++k;
  p.k = k;
  // log-space to survive large k; underflow to 0 is documented
  p.eta = std::exp(std::log(epsilon) - std::log(C_eta) - 0.5 * k * std::log(k + 1.0));
  return p;
}

std::string ContaminationParams::to_json() const {
  nlohmann::json j{{"epsilon", epsilon}, {"delta", delta}, {"C", C},
                   {"C_eta", C_eta},     {"B", B},         {"gamma", gamma},
                   {"k", k},             {"eta", eta}};
  return j.dump(2);
}

ContaminationParams ContaminationParams::from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    return derive_params(j.at("epsilon").get<double>(), j.at("delta").get<double>(),
                         j.value("C", 9.0), j.value("C_eta", 1.0));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("ContaminationParams: bad JSON: ") + e.what());
  }
}

}  // namespace contam
