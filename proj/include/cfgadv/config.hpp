#ifndef CFGADV_CONFIG_HPP
#define CFGADV_CONFIG_HPP

#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cfgadv/attacks.hpp"
#include "cfgadv/corpus.hpp"
#include "cfgadv/error.hpp"
#include "cfgadv/gea.hpp"
#include "cfgadv/model.hpp"

namespace cfgadv {

/// Everything the pipeline can be told through a config file. Seeds are not
/// here: one run seed (--seed) drives corpus, split, training and sampling.
struct PipelineConfig {
  CorpusSpec corpus;
  double train_ratio = 0.8;
  TrainConfig train;
  std::vector<AttackConfig> attacks;
  std::vector<std::size_t> density_levels{0, 5, 10, 20, 40};
  TargetStrategy density_target = TargetStrategy::MedianSize;

  PipelineConfig() {
    for (auto m : kAllAttacks) attacks.push_back(AttackConfig::defaults(m));
  }

  AttackConfig& attack(AttackMethod m) {
    for (auto& a : attacks)
      if (a.method == m) return a;
    throw UsageError("no config for attack " + std::string(to_string(m)));
  }
};

namespace detail {

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::stringstream is(item);
    T v{};
    if (!(is >> v) || !(is >> std::ws).eof()) throw UsageError("config " + key + ": bad list element '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace detail

/// Applies key=value settings grouped in [section]s on top of `cfg`.
/// Sections: corpus, split, classifier, density, and one per attack method
/// (cw, deepfool, elasticnet, jsma, mim, pgd). Unknown keys are errors.
inline void apply_config_text(PipelineConfig& cfg, std::istream& in, const std::string& origin = "<config>") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw UsageError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw UsageError(origin + ": key '" + section + "' must appear inside a [section]");
    const std::string sec = detail::lower(section);
    for (const auto& [key, node] : body) {
      const std::string full = sec + "." + key;
      const std::string value = node.data();
      auto num = [&]<class T>(T& target) {
        std::stringstream ss(value);
        T v{};
        if (!(ss >> v) || !(ss >> std::ws).eof())
          throw UsageError(origin + ": " + full + ": cannot parse '" + value + "'");
        target = v;
      };
      auto flag = [&](bool& target) {
        const auto v = detail::lower(value);
        if (v == "true" || v == "1" || v == "yes") target = true;
        else if (v == "false" || v == "0" || v == "no") target = false;
        else throw UsageError(origin + ": " + full + ": expected a boolean, got '" + value + "'");
      };
      auto unknown = [&] { throw UsageError(origin + ": unknown key " + full); };

      if (sec == "corpus") {
        // benign_* / malicious_* profile keys
        ClassProfile* p = nullptr;
        std::string rest;
        if (key.rfind("benign_", 0) == 0) p = &cfg.corpus.benign, rest = key.substr(7);
        else if (key.rfind("malicious_", 0) == 0) p = &cfg.corpus.malicious, rest = key.substr(10);
        else unknown();
        if (rest == "count") num(p->count);
        else if (rest == "median_nodes") num(p->median_nodes);
        else if (rest == "dispersion") num(p->dispersion);
        else if (rest == "p_branch") num(p->p_branch);
        else if (rest == "p_back") num(p->p_back);
        else if (rest == "max_nodes") num(p->max_nodes);
        else unknown();
      } else if (sec == "split") {
        if (key == "train_ratio") num(cfg.train_ratio);
        else unknown();
      } else if (sec == "classifier") {
        if (key == "hidden") cfg.train.hidden = detail::parse_list<int>(full, value);
        else if (key == "learning_rate") num(cfg.train.learning_rate);
        else if (key == "batch_size") num(cfg.train.batch_size);
        else if (key == "epochs") num(cfg.train.epochs);
        else if (key == "class_weighting") flag(cfg.train.class_weighting);
        else if (key == "adam") flag(cfg.train.adam);
        else unknown();
      } else if (sec == "density") {
        if (key == "levels") cfg.density_levels = detail::parse_list<std::size_t>(full, value);
        else if (key == "target") {
          const auto v = detail::lower(value);
          if (v == "minimum") cfg.density_target = TargetStrategy::MinSize;
          else if (v == "median") cfg.density_target = TargetStrategy::MedianSize;
          else if (v == "maximum") cfg.density_target = TargetStrategy::MaxSize;
          else throw UsageError(origin + ": " + full + ": expected minimum|median|maximum");
        } else unknown();
      } else {
        std::optional<AttackMethod> method;
        for (auto m : kAllAttacks)
          if (detail::lower(std::string(to_string(m))) == sec) method = m;
        if (!method) throw UsageError(origin + ": unknown section [" + section + "]");
        AttackConfig& a = cfg.attack(*method);
        if (key == "epsilon") num(a.epsilon);
        else if (key == "step_size") num(a.step_size);
        else if (key == "max_iterations") num(a.max_iterations);
        else if (key == "early_stop") flag(a.early_stop);
        else if (key == "initial_const") num(a.initial_const);
        else if (key == "binary_search_steps") num(a.binary_search_steps);
        else if (key == "kappa") num(a.kappa);
        else if (key == "beta") num(a.beta);
        else if (key == "momentum") num(a.momentum);
        else if (key == "overshoot") num(a.overshoot);
        else if (key == "theta") num(a.theta);
        else if (key == "gamma") num(a.gamma);
        else unknown();
      }
    }
  }
  cfg.corpus.check();
  cfg.train.check();
  for (const auto& a : cfg.attacks) a.check();
}

/// Applies command-line overrides of the form section.key=value.
inline void apply_overrides(PipelineConfig& cfg, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq || dot == 0 || dot + 1 == eq)
      throw UsageError("override '" + o + "' is not of the form section.key=value");
    std::stringstream ini;
    ini << '[' << o.substr(0, dot) << "]\n" << o.substr(dot + 1, eq - dot - 1) << '=' << o.substr(eq + 1) << '\n';
    apply_config_text(cfg, ini, "--set " + o);
  }
}

}  // namespace cfgadv

#endif  // CFGADV_CONFIG_HPP
