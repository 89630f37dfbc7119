#include "depthlab/experiments.hpp"

#include <toml.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace depthlab
{

namespace
{

void reject_unknown(const toml::table &t, const std::set<std::string> &allowed, const std::string &where)
{
	for (const auto &[key, node] : t) {
		(void)node;
		if (!allowed.count(std::string(key.str())))
			throw InputError("config: unknown key '" + std::string(key.str()) + "' in " + where);
	}
}

double get_double(const toml::table &t, const char *key, double fallback)
{
	const toml::node *n = t.get(key);
	if (!n) return fallback;
	if (auto v = n->value<double>()) return *v;
	throw InputError(std::string("config: '") + key + "' must be a number");
}

std::optional<double> get_opt_double(const toml::table &t, const char *key)
{
	if (!t.get(key)) return std::nullopt;
	return get_double(t, key, 0);
}

std::int64_t get_int(const toml::table &t, const char *key, std::int64_t fallback)
{
	const toml::node *n = t.get(key);
	if (!n) return fallback;
	if (auto v = n->value_exact<std::int64_t>()) return *v;
	throw InputError(std::string("config: '") + key + "' must be an integer");
}

bool get_bool(const toml::table &t, const char *key, bool fallback)
{
	const toml::node *n = t.get(key);
	if (!n) return fallback;
	if (auto v = n->value_exact<bool>()) return *v;
	throw InputError(std::string("config: '") + key + "' must be true or false");
}

std::string get_string(const toml::table &t, const char *key, const std::string &fallback)
{
	const toml::node *n = t.get(key);
	if (!n) return fallback;
	if (auto v = n->value_exact<std::string>()) return *v;
	throw InputError(std::string("config: '") + key + "' must be a string");
}

// Accepts a scalar or an array.
template <typename T>
std::optional<std::vector<T>> get_list(const toml::table &t, const char *key)
{
	const toml::node *n = t.get(key);
	if (!n) return std::nullopt;
	std::vector<T> out;
	auto take = [&](const toml::node &item) {
		std::optional<T> v;
		if constexpr (std::is_floating_point_v<T>)
			v = item.value<double>();
		else
			v = item.value_exact<std::int64_t>();
		if (!v) throw InputError(std::string("config: '") + key + "' has an entry of the wrong type");
		out.push_back(static_cast<T>(*v));
	};
	if (const toml::array *arr = n->as_array()) {
		for (const auto &item : *arr)
			take(item);
	} else {
		take(*n);
	}
	return out;
}

const toml::table *subtable(const toml::table &t, const char *key)
{
	const toml::node *n = t.get(key);
	if (!n) return nullptr;
	if (const toml::table *s = n->as_table()) return s;
	throw InputError(std::string("config: '") + key + "' must be a table");
}

toml::table parse_toml(const std::string &text)
{
	try {
		return toml::parse(text);
	} catch (const toml::parse_error &e) {
		std::ostringstream os;
		os << "config: TOML parse error at line " << e.source().begin.line << ": " << e.description();
		throw InputError(os.str());
	}
}

std::string read_file(const std::string &path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in) throw InputError("cannot open '" + path + "'");
	std::ostringstream os;
	os << in.rdbuf();
	return os.str();
}

ContaminantSpec parse_contaminant(const toml::table &t, const std::set<std::string> &extra)
{
	std::set<std::string> allowed{"family", "offset", "location", "shift", "alpha", "scale"};
	allowed.insert(extra.begin(), extra.end());
	reject_unknown(t, allowed, "[contaminant]");
	ContaminantSpec c;
	c.family = get_string(t, "family", c.family);
	c.offset = get_double(t, "offset", c.offset);
	c.location = get_list<double>(t, "location");
	c.shift = get_double(t, "shift", c.shift);
	c.alpha = get_double(t, "alpha", c.alpha);
	c.scale = get_double(t, "scale", c.scale);
	return c;
}

ModelSpec parse_model_table(const toml::table &t, const std::set<std::string> &extra)
{
	std::set<std::string> allowed{"family", "alpha", "scale"};
	allowed.insert(extra.begin(), extra.end());
	reject_unknown(t, allowed, "[model]");
	ModelSpec m;
	m.family = get_string(t, "family", m.family);
	m.alpha = get_double(t, "alpha", m.family == "cauchy" ? 1.0 : 2.0);
	m.scale = get_double(t, "scale", m.scale);
	if (m.family == "stable" && !t.get("alpha")) throw InputError("config: stable model needs alpha");
	return m;
}

}  // namespace

ModelFile parse_model_file(const std::string &toml_text)
{
	toml::table const t = parse_toml(toml_text);
	reject_unknown(t, {"family", "alpha", "dim", "scale", "contaminant"}, "model file");
	ModelSpec const spec = parse_model_table(t, {"dim", "contaminant"});
	std::int64_t const dim = get_int(t, "dim", 0);
	if (dim < 2) throw InputError("model file: dim must be an integer >= 2");
	ModelFile out{spec.build(dim), std::nullopt, 0.0};
	if (const toml::table *c = subtable(t, "contaminant")) {
		out.contaminant = parse_contaminant(*c, {"epsilon"});
		out.epsilon = get_double(*c, "epsilon", 0.0);
		(void)ContaminatedModel(out.model, out.contaminant->build(out.model), out.epsilon);
	}
	return out;
}

ModelFile load_model_file(const std::string &path) { return parse_model_file(read_file(path)); }

ExperimentConfig parse_experiment_config(const std::string &toml_text)
{
	toml::table const t = parse_toml(toml_text);
	reject_unknown(t,
		       {"experiment", "seed", "replications", "delta", "n", "d", "epsilon", "depth_kind", "model", "contaminant",
			"growth", "method"},
		       "experiment config");
	ExperimentConfig c;
	if (!t.get("experiment")) throw InputError("config: missing 'experiment'");
	c.kind = parse_experiment_kind(get_string(t, "experiment", ""));
	std::int64_t const seed = get_int(t, "seed", 1);
	if (seed < 0) throw InputError("config: seed must be >= 0");
	c.seed = static_cast<std::uint64_t>(seed);
	c.replications = get_int(t, "replications", c.replications);
	c.delta = get_double(t, "delta", c.delta);
	if (auto v = get_list<Eigen::Index>(t, "n")) c.n_grid = *v;
	if (auto v = get_list<Eigen::Index>(t, "d")) c.d_grid = *v;
	if (auto v = get_list<double>(t, "epsilon")) c.epsilon_grid = *v;
	c.depth_kind = parse_scatter_depth(get_string(t, "depth_kind", "standard"));
	if (const toml::table *m = subtable(t, "model")) c.model = parse_model_table(*m, {});
	if (const toml::table *q = subtable(t, "contaminant")) c.contaminant = parse_contaminant(*q, {});
	if (const toml::table *g = subtable(t, "growth")) {
		reject_unknown(*g, {"gamma", "kappa"}, "[growth]");
		c.gamma = get_opt_double(*g, "gamma");
		c.kappa = get_opt_double(*g, "kappa");
	}
	if (const toml::table *m = subtable(t, "method")) {
		reject_unknown(*m, {"directions", "pool_cap", "multistarts", "scatter_directions", "coverage_assert", "interval_check"},
			       "[method]");
		c.directions = get_int(*m, "directions", c.directions);
		c.pool_cap = get_int(*m, "pool_cap", c.pool_cap);
		c.multistarts = get_int(*m, "multistarts", c.multistarts);
		c.scatter_directions = get_int(*m, "scatter_directions", c.scatter_directions);
		c.coverage_assert = get_bool(*m, "coverage_assert", c.coverage_assert);
		c.interval_check = get_bool(*m, "interval_check", c.interval_check);
	}
	c.validate();
	return c;
}

ExperimentConfig load_experiment_config(const std::string &path) { return parse_experiment_config(read_file(path)); }

}  // namespace depthlab
