#include "pcl/config.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <array>
#include <cstdio>
#include <set>
#include <sstream>

#include "pcl/errors.hpp"

namespace pcl {

namespace pt = boost::property_tree;

void ExperimentConfig::sync() {
  pinn.colloc_seed = seed;
  pinn.par.threads = deterministic ? 1 : threads;
  spec.reaction = parse_reaction(reaction);
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  const auto setup = default_allen_cahn();
  c.spec = setup.spec;
  c.grid = setup.grid;
  c.weights = setup.weights;
  // No budget is given for the adjoint runs; 10 x 200 iterations.
  c.adjoint_qn.outer_epochs = 10;
  c.adjoint_qn.max_iters_per_epoch = 200;
  c.sync();
  return c;
}

ExperimentConfig coarse_config() {
  auto c = default_config();
  c.grid = GridSpec::uniform(33, 10, c.spec.horizon, 1);
  c.pinn.n_int = 400;
  c.pinn.n_bc = 32;
  c.pinn.n_validation = 400;
  c.pinn.adam.steps = 100;
  c.pinn.qn.outer_epochs = 3;
  c.pinn.qn.max_iters_per_epoch = 30;
  c.adjoint_qn.outer_epochs = 2;
  c.adjoint_qn.max_iters_per_epoch = 50;
  c.sync();
  return c;
}

ReactionTerm parse_reaction(const std::string& text) {
  if (text == "allen_cahn") return ReactionTerm::allen_cahn();
  if (text == "zeldovich") return ReactionTerm::zeldovich();
  if (text.rfind("zfk:", 0) == 0) {
    try {
      return ReactionTerm::zfk(std::stod(text.substr(4)));
    } catch (const std::logic_error&) {
    }
  }
  throw InvalidArgument("unknown reaction term '" + text + "'");
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string widths_text(const std::vector<std::size_t>& w) {
  std::string s;
  for (std::size_t k = 0; k < w.size(); ++k) s += (k ? "," : "") + std::to_string(w[k]);
  return s;
}

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
  return out;
}

// Both directions go through one table so load and dump cannot drift apart.
struct Binder {
  pt::ptree* in = nullptr;  // load mode when set
  std::ostringstream* out = nullptr;
  std::string section;
  std::set<std::string> seen;

  void begin(const std::string& name) {
    section = name;
    if (out) *out << (out->tellp() > 0 ? "\n[" : "[") << name << "]\n";
  }
  const std::string* find(const std::string& key) {
    if (!in) return nullptr;
    seen.insert(section + "." + key);
    auto sec = in->get_child_optional(section);
    if (!sec) return nullptr;
    auto v = sec->get_child_optional(key);
    if (!v) return nullptr;
    return &v->data();
  }
  void real(const std::string& key, double& v) {
    if (out) *out << key << " = " << fmt(v) << "\n";
    if (auto s = find(key)) v = convert<double>(key, *s);
  }
  void count(const std::string& key, std::size_t& v) {
    if (out) *out << key << " = " << v << "\n";
    if (auto s = find(key)) v = convert<std::size_t>(key, *s);
  }
  void u64(const std::string& key, std::uint64_t& v) {
    if (out) *out << key << " = " << v << "\n";
    if (auto s = find(key)) v = convert<std::uint64_t>(key, *s);
  }
  void flag(const std::string& key, bool& v) {
    if (out) *out << key << " = " << (v ? "true" : "false") << "\n";
    if (auto s = find(key)) {
      if (*s == "true" || *s == "1") v = true;
      else if (*s == "false" || *s == "0") v = false;
      else throw InvalidArgument("config: " + section + "." + key + " must be true or false");
    }
  }
  void text(const std::string& key, std::string& v) {
    if (out) *out << key << " = " << v << "\n";
    if (auto s = find(key)) v = *s;
  }

  template <class T>
  T convert(const std::string& key, const std::string& s) {
    std::istringstream is(s);
    T v{};
    is >> v;
    if (!is || !(is >> std::ws).eof())
      throw InvalidArgument("config: cannot parse " + section + "." + key + " = '" + s + "'");
    return v;
  }
};

void bind_all(Binder& b, ExperimentConfig& c) {
  std::string initial = c.spec.initial_state.description;
  std::string target = c.spec.target_state.description;
  std::size_t n_space = c.grid.n_space, n_time = c.grid.n_time, substeps = c.grid.substeps;
  std::string widths = widths_text(c.arch.widths);

  b.begin("problem");
  b.real("epsilon", c.spec.epsilon);
  b.real("horizon", c.spec.horizon);
  b.real("beta_terminal", c.spec.beta_terminal);
  b.real("beta_control", c.spec.beta_control);
  b.text("initial_state", initial);
  b.text("target_state", target);
  b.text("reaction", c.reaction);

  b.begin("grid");
  b.count("n_space", n_space);
  b.count("n_time", n_time);
  b.count("substeps", substeps);

  b.begin("weights");
  b.real("w_res", c.weights.w_res);
  b.real("w_bc", c.weights.w_bc);
  b.real("w_ic", c.weights.w_ic);
  b.real("w_y", c.weights.w_y);
  b.real("w_lambda", c.weights.w_lambda);
  b.real("w_bc_y", c.weights.w_bc_y);
  b.real("w_bc_lambda", c.weights.w_bc_lambda);
  b.real("w_T", c.weights.w_T);
  b.real("w_st", c.weights.w_st);

  b.begin("network");
  b.text("widths", widths);
  b.real("x_shift", c.arch.scaling.x_shift);
  b.real("x_scale", c.arch.scaling.x_scale);
  b.real("t_shift", c.arch.scaling.t_shift);
  b.real("t_scale", c.arch.scaling.t_scale);

  b.begin("pinn");
  b.count("n_int", c.pinn.n_int);
  b.count("n_bc", c.pinn.n_bc);
  b.count("n_validation", c.pinn.n_validation);
  b.real("adam_lr0", c.pinn.adam.lr0);
  b.real("adam_decay_factor", c.pinn.adam.decay_factor);
  b.count("adam_decay_every", c.pinn.adam.decay_every);
  b.count("adam_steps", c.pinn.adam.steps);
  b.real("adam_beta1", c.pinn.adam.beta1);
  b.real("adam_beta2", c.pinn.adam.beta2);
  b.real("adam_eps", c.pinn.adam.eps);

  for (auto [name, qn] : {std::pair<const char*, QuasiNewtonConfig*>{"pinn_qn", &c.pinn.qn},
                          {"adjoint_qn", &c.adjoint_qn}}) {
    b.begin(name);
    b.count("outer_epochs", qn->outer_epochs);
    b.count("max_iters_per_epoch", qn->max_iters_per_epoch);
    b.count("memory", qn->memory);
    b.real("wolfe_c1", qn->wolfe_c1);
    b.real("wolfe_c2", qn->wolfe_c2);
    b.real("grad_tol", qn->grad_tol);
    b.flag("self_scaling", qn->self_scaling);
    b.real("broyden_phi", qn->broyden_phi);
    b.flag("adaptive_broyden", qn->adaptive_broyden);
    b.count("max_line_search_evals", qn->max_line_search_evals);
    b.flag("keep_state_across_epochs", qn->keep_state_across_epochs);
  }

  b.begin("run");
  b.u64("seed", c.seed);
  b.count("threads", c.threads);
  b.flag("deterministic", c.deterministic);
  b.text("reference", c.reference_path);
  b.text("init_control", c.init_control_path);

  if (b.in) {
    c.spec.initial_state = Profile::parse(initial);
    c.spec.target_state = Profile::parse(target);
    c.arch.widths = parse_widths(widths);
    c.grid = GridSpec::uniform(n_space, n_time, c.spec.horizon, substeps);
  }
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw IoError("cannot read config '" + path.string() + "': " + e.message());
  }
  Binder b;
  b.in = &tree;
  try {
    bind_all(b, base);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  for (const auto& [section, sub] : tree) {
    if (sub.empty()) throw InvalidArgument("config: key '" + section + "' outside any section");
    for (const auto& [key, value] : sub) {
      (void)value;
      if (!b.seen.count(section + "." + key))
        throw InvalidArgument("config: unknown key " + section + "." + key);
    }
  }
  base.arch.validate();
  base.sync();
  return base;
}

std::string dump_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  Binder b;
  b.out = &os;
  auto copy = cfg;
  bind_all(b, copy);
  return os.str();
}

std::string sha256_hex(std::string_view text) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(buf, sizeof buf, "%02x", md[k]);
    hex += buf;
  }
  return hex;
}

}  // namespace pcl
