// Copyright 2026 The h2ion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "h2ion/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#ifndef H2ION_VERSION
#define H2ION_VERSION "unknown"
#endif

namespace h2ion {

using nlohmann::json;

std::string version() { return H2ION_VERSION; }

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Unitary: return "unitary";
    case Scenario::Dissipative: return "dissipative";
    case Scenario::Influx: return "influx";
    case Scenario::Anode: return "anode";
  }
  return "?";
}

namespace {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

// Reads keys off one JSON object and rejects whatever is left over.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(where_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    static const json missing;
    return j_.contains(key) ? j_.at(key) : missing;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(where_ + "." + key, "wrong type");
    }
  }

  void number(const std::string& key, double& out) {
    seen_.insert(key);
    if (!has(key)) return;
    if (!j_.at(key).is_number()) fail(where_ + "." + key, "expected a number");
    out = j_.at(key).get<double>();
    if (!std::isfinite(out)) fail(where_ + "." + key, "must be finite");
  }

  void integer(const std::string& key, int& out) {
    seen_.insert(key);
    if (!has(key)) return;
    if (!j_.at(key).is_number_integer()) fail(where_ + "." + key, "expected an integer");
    out = j_.at(key).get<int>();
  }

  void flag(const std::string& key, bool& out) {
    seen_.insert(key);
    if (!has(key)) return;
    if (!j_.at(key).is_boolean()) fail(where_ + "." + key, "expected true or false");
    out = j_.at(key).get<bool>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(where_, "unknown key '" + it.key() + "'");
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

const char* const kGroups[] = {"photon", "electron", "phonon"};

std::string tunneling_name(TunnelingForm t) { return t == TunnelingForm::Printed ? "printed" : "hopping"; }
std::string engine_name(Engine e) { return e == Engine::Dense ? "dense" : "sectors"; }

void parse_model(const json& j, RunConfig& cfg) {
  Section s(j, "model");
  if (s.has("scenario")) {
    std::string v;
    s.read("scenario", v);
    bool ok = false;
    for (auto sc : {Scenario::Unitary, Scenario::Dissipative, Scenario::Influx, Scenario::Anode})
      if (to_string(sc) == v) {
        cfg.scenario = sc;
        ok = true;
      }
    if (!ok) fail("model.scenario", "unknown scenario '" + v + "'");
  } else {
    s.raw("scenario");
  }
  if (s.has("initial_state")) {
    std::string v;
    s.read("initial_state", v);
    auto id = initial_state_from_string(v);
    if (!id) fail("model.initial_state", "unknown initial state '" + v + "'");
    cfg.initial_state = *id;
  }
  auto& p = cfg.params;
  s.number("hbar", p.hbar);
  s.number("omega01_up", p.omega01_up);
  s.number("omega01_dn", p.omega01_dn);
  s.number("omega12_up", p.omega12_up);
  s.number("omega12_dn", p.omega12_dn);
  s.number("omega_ph", p.omega_ph);
  s.number("g01_up", p.g01_up);
  s.number("g01_dn", p.g01_dn);
  s.number("g12_up", p.g12_up);
  s.number("g12_dn", p.g12_dn);
  s.number("g_omega", p.g_omega);
  s.number("zeta", p.zeta);
  s.flag("atom_energy_spin_symmetric", p.atom_energy_spin_symmetric);
  s.flag("bond_requires_nuclei_together", p.bond_requires_nuclei_together);
  if (s.has("tunneling")) {
    std::string v;
    s.read("tunneling", v);
    if (v == "printed") p.tunneling = TunnelingForm::Printed;
    else if (v == "hopping") p.tunneling = TunnelingForm::Hopping;
    else fail("model.tunneling", "expected 'printed' or 'hopping'");
  }
  s.integer("cutoff_omega12", cfg.cutoffs.omega12);
  s.integer("cutoff_omega01", cfg.cutoffs.omega01);
  s.finish();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    fail("model", e.what());
  }
  if (cfg.cutoffs.omega12 < 0 || cfg.cutoffs.omega01 < 0) fail("model", "cutoffs must be non-negative");
}

void parse_channels(const json& j, RunConfig& cfg) {
  Section s(j, "channels");
  s.number("gamma_unit", cfg.gamma_unit);
  if (!(cfg.gamma_unit > 0.0)) fail("channels.gamma_unit", "must be positive");
  std::array<std::string, 7> set_by{};
  std::vector<std::string> names(std::begin(kGroups), std::end(kGroups));
  for (Channel c : kAllChannels)
    if (c != Channel::Phonon) names.push_back(to_string(c));
  for (const auto& name : names) {
    if (!s.has(name)) {
      s.raw(name);
      continue;
    }
    Section c(s.raw(name), "channels." + name);
    ChannelSetting setting;
    if (c.has("gamma")) {
      double g = 0.0;
      c.number("gamma", g);
      setting.log10_gamma = g;
    } else {
      c.raw("gamma");
    }
    c.number("mu", setting.mu);
    c.finish();
    for (Channel ch : channels_for(name)) {
      auto& prev = set_by[static_cast<std::size_t>(ch)];
      if (!prev.empty()) fail("channels", "channel " + to_string(ch) + " set by both '" + prev + "' and '" + name + "'");
      prev = name;
      cfg.channel(ch) = setting;
    }
  }
  s.finish();
}

std::vector<double> parse_values(Section& s) {
  std::vector<double> values;
  if (s.has("values")) {
    const json& v = s.raw("values");
    if (!v.is_array()) fail(s.where() + ".values", "expected a list of numbers");
    for (const auto& x : v) {
      if (!x.is_number()) fail(s.where() + ".values", "expected a list of numbers");
      values.push_back(x.get<double>());
    }
    if (s.has("from") || s.has("to") || s.has("count")) fail(s.where(), "give either values or from/to/count");
    s.raw("from"), s.raw("to"), s.raw("count");
  } else {
    s.raw("values");
    if (!s.has("from") || !s.has("to")) fail(s.where(), "needs values or from/to");
    double from = 0.0, to = 0.0;
    int count = 13;
    s.number("from", from);
    s.number("to", to);
    s.integer("count", count);
    if (count < 1) fail(s.where() + ".count", "must be >= 1");
    for (int i = 0; i < count; ++i) values.push_back(count == 1 ? from : from + (to - from) * i / (count - 1));
  }
  if (values.empty()) fail(s.where() + ".values", "must not be empty");
  return values;
}

void parse_sweep(const json& j, RunConfig& cfg) {
  Section s(j, "sweep");
  if (s.has("axes")) {
    const json& axes = s.raw("axes");
    if (!axes.is_array()) fail("sweep.axes", "expected a list");
    for (std::size_t i = 0; i < axes.size(); ++i) {
      Section a(axes[i], "sweep.axes[" + std::to_string(i) + "]");
      SweepAxis axis;
      std::string quantity = "gamma";
      a.read("quantity", quantity);
      if (quantity == "gamma") axis.quantity = SweepAxis::Quantity::Gamma;
      else if (quantity == "mu") axis.quantity = SweepAxis::Quantity::Mu;
      else fail(a.where() + ".quantity", "expected 'gamma' or 'mu'");
      if (!a.has("channel")) fail(a.where(), "missing channel");
      a.read("channel", axis.target);
      try {
        axis.channels = channels_for(axis.target);
      } catch (const std::invalid_argument& e) {
        fail(a.where() + ".channel", e.what());
      }
      axis.values = parse_values(a);
      a.finish();
      cfg.sweep.push_back(std::move(axis));
    }
  } else {
    s.raw("axes");
  }
  s.finish();
  if (cfg.sweep.size() > 2) fail("sweep.axes", "at most two axes");
  if (cfg.sweep.size() == 2) {
    for (Channel a : cfg.sweep[0].channels)
      for (Channel b : cfg.sweep[1].channels)
        if (a == b) fail("sweep.axes", "axes must reference distinct channels");
  }
}

void parse_integration(const json& j, RunConfig& cfg) {
  Section s(j, "integration");
  auto& in = cfg.integration;
  if (s.has("dt") && s.raw("dt") == "auto") {
    in.dt.reset();
  } else if (s.has("dt")) {
    double dt = 0.0;
    s.number("dt", dt);
    if (!(dt > 0.0)) fail("integration.dt", "must be positive");
    in.dt = dt;
  } else {
    s.raw("dt");
  }
  s.number("t_end", in.t_end);
  if (s.has("t_max")) {
    double t = 0.0;
    s.number("t_max", t);
    in.t_max = t;
  } else {
    s.raw("t_max");
  }
  s.number("plateau_tolerance", in.plateau_tolerance);
  s.number("plateau_window", in.plateau_window);
  s.integer("stride", in.stride);
  s.integer("doublings", in.ptsim.doublings);
  s.integer("taylor_terms", in.ptsim.taylor_terms);
  s.number("trace_tol", in.trace_tol);
  if (s.has("engine")) {
    std::string v;
    s.read("engine", v);
    if (v == "dense") in.engine = Engine::Dense;
    else if (v == "sectors") in.engine = Engine::Sectors;
    else fail("integration.engine", "expected 'dense' or 'sectors'");
  }
  if (s.has("dissipator_step")) {
    std::string v;
    s.read("dissipator_step", v);
    if (v == "kraus") in.dissipator_step = DissipatorStep::Kraus;
    else if (v == "euler") in.dissipator_step = DissipatorStep::Euler;
    else fail("integration.dissipator_step", "expected 'kraus' or 'euler'");
  }
  s.flag("prune", in.prune);
  s.number("stabilization_threshold", in.stabilization_threshold);
  s.finish();
  if (!(in.t_end >= 0.0)) fail("integration.t_end", "must be non-negative");
  if (in.t_max && *in.t_max < in.t_end) fail("integration.t_max", "must be >= t_end");
  if (in.stride < 1) fail("integration.stride", "must be >= 1");
  if (!(in.trace_tol > 0.0)) fail("integration.trace_tol", "must be positive");
  if (!(in.plateau_tolerance > 0.0)) fail("integration.plateau_tolerance", "must be positive");
  if (!(in.plateau_window > 0.0 && in.plateau_window <= 1.0)) fail("integration.plateau_window", "must lie in (0, 1]");
  try {
    in.ptsim.validate();
  } catch (const std::invalid_argument& e) {
    fail("integration", e.what());
  }
}

void parse_output(const json& j, RunConfig& cfg) {
  Section s(j, "output");
  s.read("prefix", cfg.output.prefix);
  s.flag("dump_hamiltonian", cfg.output.dump_hamiltonian);
  s.finish();
  if (cfg.output.prefix.empty()) fail("output.prefix", "must not be empty");
}

json channel_json(const ChannelSetting& c) {
  json j;
  j["gamma"] = c.log10_gamma ? json(*c.log10_gamma) : json(nullptr);
  j["mu"] = c.mu;
  return j;
}

}  // namespace

std::vector<Channel> channels_for(const std::string& name) {
  if (name == "photon") return {Channel::Photon12Up, Channel::Photon12Dn, Channel::Photon01Up, Channel::Photon01Dn};
  if (name == "electron") return {Channel::ElectronUp, Channel::ElectronDn};
  if (auto c = channel_from_string(name)) return {*c};
  throw std::invalid_argument("unknown channel '" + name + "'");
}

std::vector<ChannelRates> RunConfig::rates() const {
  std::vector<ChannelRates> out;
  for (Channel c : kAllChannels) {
    const auto& s = channel(c);
    if (!s.log10_gamma) continue;
    out.push_back({c, gamma_unit * std::pow(10.0, *s.log10_gamma), s.mu});
  }
  return out;
}

void RunConfig::validate() const {
  for (Channel c : kAllChannels) {
    const auto& s = channel(c);
    if (!(s.mu >= 0.0 && s.mu < 1.0)) {
      throw std::invalid_argument("channels." + to_string(c) +
                                  ".mu: must lie in [0, 1); influx has to stay weaker than dissipation");
    }
    if (s.mu > 0.0 && scenario != Scenario::Influx) {
      throw std::invalid_argument("channels." + to_string(c) + ".mu: influx is only used by the influx scenario");
    }
    if (s.mu > 0.0 && !s.log10_gamma) throw std::invalid_argument("channels." + to_string(c) + ".mu: needs a gamma");
    if (scenario == Scenario::Unitary && s.log10_gamma) {
      throw std::invalid_argument("channels." + to_string(c) + ": the unitary scenario takes no channels");
    }
    if (scenario == Scenario::Anode && s.log10_gamma && c != Channel::ElectronUp && c != Channel::ElectronDn) {
      throw std::invalid_argument("channels." + to_string(c) + ": the anode scenario only uses the electron channels");
    }
  }
  if (scenario == Scenario::Anode) {
    const auto& u = channel(Channel::ElectronUp);
    const auto& d = channel(Channel::ElectronDn);
    if (!u.log10_gamma || !d.log10_gamma || *u.log10_gamma != *d.log10_gamma) {
      throw std::invalid_argument("channels.electron: the anode scenario needs one gamma for both spins");
    }
  }
}

std::string RunConfig::resolved_json(int indent) const {
  json j;
  j["scenario"] = to_string(scenario);
  j["initial_state"] = to_string(initial_state);
  json& m = j["model"];
  m["hbar"] = params.hbar;
  m["omega01_up"] = params.omega01_up;
  m["omega01_dn"] = params.omega01_dn;
  m["omega12_up"] = params.omega12_up;
  m["omega12_dn"] = params.omega12_dn;
  m["omega_ph"] = params.omega_ph;
  m["g01_up"] = params.g01_up;
  m["g01_dn"] = params.g01_dn;
  m["g12_up"] = params.g12_up;
  m["g12_dn"] = params.g12_dn;
  m["g_omega"] = params.g_omega;
  m["zeta"] = params.zeta;
  m["atom_energy_spin_symmetric"] = params.atom_energy_spin_symmetric;
  m["bond_requires_nuclei_together"] = params.bond_requires_nuclei_together;
  m["tunneling"] = tunneling_name(params.tunneling);
  m["cutoff_omega12"] = cutoffs.omega12;
  m["cutoff_omega01"] = cutoffs.omega01;
  json& c = j["channels"];
  c["gamma_unit"] = gamma_unit;
  for (Channel ch : kAllChannels) c[to_string(ch)] = channel_json(channel(ch));
  json& in = j["integration"];
  in["dt"] = integration.dt ? json(*integration.dt) : json("auto");
  in["t_end"] = integration.t_end;
  in["t_max"] = integration.t_max ? json(*integration.t_max) : json(integration.t_end);
  in["plateau_tolerance"] = integration.plateau_tolerance;
  in["plateau_window"] = integration.plateau_window;
  in["stride"] = integration.stride;
  in["doublings"] = integration.ptsim.doublings;
  in["taylor_terms"] = integration.ptsim.taylor_terms;
  in["trace_tol"] = integration.trace_tol;
  in["engine"] = engine_name(integration.engine);
  in["dissipator_step"] = to_string(integration.dissipator_step);
  in["prune"] = integration.prune;
  in["stabilization_threshold"] = integration.stabilization_threshold;
  json axes = json::array();
  for (const auto& a : sweep) {
    json x;
    x["quantity"] = a.quantity == SweepAxis::Quantity::Gamma ? "gamma" : "mu";
    x["channel"] = a.target;
    x["values"] = a.values;
    axes.push_back(x);
  }
  j["sweep"]["axes"] = axes;
  j["output"]["prefix"] = output.prefix;
  j["output"]["dump_hamiltonian"] = output.dump_hamiltonian;
  return j.dump(indent);
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Section top(doc, "config");
  if (!top.has("scenario") && !(doc.contains("model") && doc["model"].contains("scenario"))) {
    fail("config", "missing required key 'scenario'");
  }
  if (top.has("scenario") && doc.contains("model") && doc["model"].contains("scenario")) {
    fail("config", "scenario given twice");
  }
  if (top.has("initial_state") && doc.contains("model") && doc["model"].contains("initial_state")) {
    fail("config", "initial_state given twice");
  }
  // the two top-level shortcuts are folded into the model section
  json model = top.has("model") ? json(top.raw("model")) : json::object();
  if (!model.is_object()) fail("model", "expected an object");
  if (top.has("scenario")) model["scenario"] = top.raw("scenario");
  if (top.has("initial_state")) model["initial_state"] = top.raw("initial_state");
  top.raw("scenario"), top.raw("initial_state"), top.raw("model");
  parse_model(model, cfg);
  if (top.has("channels")) parse_channels(top.raw("channels"), cfg);
  if (top.has("integration")) parse_integration(top.raw("integration"), cfg);
  if (top.has("sweep")) parse_sweep(top.raw("sweep"), cfg);
  if (top.has("output")) parse_output(top.raw("output"), cfg);
  top.raw("channels"), top.raw("integration"), top.raw("sweep"), top.raw("output");
  top.finish();
  cfg.validate();
  for (const auto& axis : cfg.sweep) {
    RunConfig probe = cfg;
    for (double v : axis.values) {
      for (Channel c : axis.channels) {
        if (axis.quantity == SweepAxis::Quantity::Gamma) probe.channel(c).log10_gamma = v;
        else probe.channel(c).mu = v;
      }
      try {
        probe.validate();
      } catch (const std::invalid_argument& e) {
        fail("sweep.axes", std::string("value ") + std::to_string(v) + " on " + axis.target + ": " + e.what());
      }
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace h2ion
