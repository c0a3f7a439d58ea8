#include <json.hpp>

#include "actsim/synthesis.hpp"

namespace actsim {

std::string export_json(const devs::CoupledSpec& spec, TickScale scale) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["schema"] = "actsim-coupled-v1";
  doc["name"] = spec.name;
  doc["tick_scale"] = scale;
  doc["inputs"] = spec.input_ports;
  doc["outputs"] = spec.output_ports;

  ordered_json components = ordered_json::array();
  for (const auto& c : spec.components) {
    ordered_json params = ordered_json::object();
    for (const auto& [key, value] : c.model->parameters()) params[key] = value;
    components.push_back({{"name", c.name},
                          {"type", std::string(c.model->type_name())},
                          {"inputs", c.model->input_ports()},
                          {"outputs", c.model->output_ports()},
                          {"phases", c.model->phases()},
                          {"params", params}});
  }
  doc["components"] = std::move(components);

  ordered_json couplings = ordered_json::array();
  auto endpoint = [](const devs::PortRef& p) {
    ordered_json j{{"port", p.port}};
    if (!p.component.empty()) j["component"] = p.component;
    return j;
  };
  for (const auto& k : spec.couplings) {
    couplings.push_back({{"from", endpoint(k.from)}, {"to", endpoint(k.to)}});
  }
  doc["couplings"] = std::move(couplings);
  return doc.dump(2) + "\n";
}

}  // namespace actsim
