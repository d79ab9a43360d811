#include "cpc/serialization.hpp"

#include <string>

namespace cpc {

nlohmann::json to_json(const ConcentricCode& code) {
  nlohmann::json doc;
  doc["variant"] = to_int(code.variant());
  doc["n"] = code.dimension();
  auto& subcodes = doc["subcodes"] = nlohmann::json::array();
  for (const auto& cw : code.subcodes()) {
    nlohmann::json levels = nlohmann::json::array();
    for (Eigen::Index i = 0; i < cw.levels().size(); ++i) levels.push_back(cw.levels()(i));
    subcodes.push_back({{"parts", cw.composition().parts()}, {"levels", std::move(levels)}});
  }
  return doc;
}

ConcentricCode code_from_json(const nlohmann::json& doc) {
  try {
    const Variant variant = variant_from_int(doc.at("variant").get<int>());
    const int n = doc.at("n").get<int>();
    std::vector<InitialCodeword> subcodes;
    for (const auto& sub : doc.at("subcodes")) {
      Composition c(sub.at("parts").get<std::vector<int>>());
      const auto values = sub.at("levels").get<std::vector<double>>();
      Eigen::VectorXd levels = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
      subcodes.emplace_back(std::move(c), std::move(levels), variant);
    }
    ConcentricCode code(variant, std::move(subcodes));
    if (code.dimension() != n)
      throw std::invalid_argument("codebook n=" + std::to_string(n) + " but subcodes have dimension " +
                                  std::to_string(code.dimension()));
    return code;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("codebook JSON: ") + e.what());
  }
}

}  // namespace cpc
