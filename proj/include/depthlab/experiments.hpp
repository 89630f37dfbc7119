#pragma once

#include "depthlab/core.hpp"
#include "depthlab/location_depth.hpp"
#include "depthlab/models.hpp"
#include "depthlab/scatter_depth.hpp"

#include <optional>
#include <string>
#include <vector>

namespace depthlab
{

inline constexpr const char *depthlab_version = "depthlab 1.0.0";

enum class ExperimentKind
{
	location_rate,
	maxdepth_coverage,
	scatter_rate,
};

ExperimentKind parse_experiment_kind(const std::string &name);
std::string to_string(ExperimentKind kind);

/// Base model family; the dimension comes from the experiment grid.
struct ModelSpec
{
	std::string family = "gaussian";  ///< gaussian | cauchy | stable
	double alpha = 2.0;               ///< stable only
	double scale = 1.0;

	AlphaModel build(Eigen::Index d) const;
};

struct ContaminantSpec
{
	std::string family = "point_mass";  ///< point_mass | gaussian | cauchy | stable
	double offset = 10.0;               ///< point mass at offset * scale * (1, ..., 1)
	std::optional<std::vector<double>> location;  ///< explicit point-mass location
	double shift = 10.0;                ///< model contaminants are centred at shift * (1, ..., 1)
	double alpha = 2.0;                 ///< stable contaminant only
	double scale = 1.0;                 ///< model contaminant scale

	Contaminant build(const AlphaModel &base) const;
};

struct ExperimentConfig
{
	ExperimentKind kind = ExperimentKind::maxdepth_coverage;
	ModelSpec model;
	ContaminantSpec contaminant;
	std::vector<Eigen::Index> n_grid{2000};
	std::vector<Eigen::Index> d_grid{2};
	std::vector<double> epsilon_grid{0.0};
	double delta = 0.05;
	Eigen::Index replications = 200;
	std::uint64_t seed = 1;

	ScatterDepthSpec depth_kind;  ///< scatter_rate only
	std::optional<double> gamma;  ///< growth condition window
	std::optional<double> kappa;  ///< growth condition slope

	Eigen::Index directions = 128;          ///< location median
	Eigen::Index pool_cap = 2000;           ///< pairwise-midpoint cap of the location median
	Eigen::Index multistarts = 8;
	Eigen::Index scatter_directions = 256;  ///< scatter median
	bool coverage_assert = true;
	bool interval_check = false;            ///< scatter_rate with alpha < 2 and standard depth

	/// Throws InputError for empty grids, epsilon outside [0, 1/3), d < 2, or an n failing
	/// sqrt(log(1/delta)/(2n)) < 1/3 (the message names the minimal admissible n).
	void validate() const;
};

/// Model specification file: family, alpha, dim, scale and an optional [contaminant] table
/// (family, location or offset, shift, alpha, scale, epsilon).
struct ModelFile
{
	AlphaModel model;
	std::optional<ContaminantSpec> contaminant;
	double epsilon = 0;
};

ModelFile parse_model_file(const std::string &toml_text);
ModelFile load_model_file(const std::string &path);

/// Parses the TOML experiment description.
ExperimentConfig parse_experiment_config(const std::string &toml_text);
ExperimentConfig load_experiment_config(const std::string &path);

/// One replication. Optional fields are empty in serialized output when unset.
struct ExperimentRecord
{
	Eigen::Index n = 0;
	Eigen::Index d = 0;
	double epsilon = 0;
	double delta = 0;
	Eigen::Index replication = 0;
	std::uint64_t seed = 0;
	double deviation = 0;
	double bound = 0;
	std::optional<bool> within_bound;
	std::optional<double> achieved_depth;
	std::optional<double> sigma_hat;

	// Diagnostics aggregated into cell summaries; not part of the record columns.
	Eigen::Index contaminated = 0;
	std::optional<bool> interval_ok;

	bool same_columns(const ExperimentRecord &other) const;
};

struct CellSummary
{
	Eigen::Index n = 0;
	Eigen::Index d = 0;
	double epsilon = 0;
	Eigen::Index replications = 0;
	double median_deviation = 0;
	double q10_deviation = 0;
	double q90_deviation = 0;
	double mean_deviation = 0;
	double bound = 0;
	std::optional<double> coverage;  ///< fraction within bound
	bool coverage_ok = true;         ///< coverage >= 1 - 2 delta (true when not applicable)
	/// Replications where n2/n1 <= eps/(1-eps) + 4.5 sqrt(log(1/delta)/(2n)) (n2 contaminated, n1 clean).
	double ratio_event_frequency = 0;
	/// Replications inside that event whose ratio n2/n1 is not below 2; must be zero.
	Eigen::Index ratio_event_violations = 0;
	/// c1 sqrt(d/n) + c2 sqrt(log(1/delta)/n) < gamma kappa - eps/(1-eps); location_rate only.
	std::optional<bool> rate_condition_holds;
	std::optional<double> interval_frequency;
};

struct ExperimentReport
{
	std::string version = depthlab_version;
	std::optional<ExperimentConfig> config;
	std::vector<ExperimentRecord> records;
	std::vector<CellSummary> cells;

	bool all_coverage_ok() const;
};

/// Worker count: DEPTHLAB_THREADS when set (>= 1), else the hardware concurrency.
unsigned worker_count();

/// Replication seed; depends only on the master seed and the cell coordinates.
std::uint64_t replication_seed(std::uint64_t master, Eigen::Index n, Eigen::Index d, double epsilon, Eigen::Index rep);

/// Deviation ||mu_hat||_beta of the location median; within_bound judges the depth gap.
/// Refuses (InputError) unless A2 is certified at the config's gamma, kappa and every epsilon.
ExperimentReport run_location_rate(const ExperimentConfig &config);

/// Deviation D(0;P) - D(mu_hat;P) against the location bound.
ExperimentReport run_maxdepth_coverage(const ExperimentConfig &config);

/// Isotropic scatter median deviation: |sigma_hat² - sigma²| (operator norm) for the standard
/// depth, the scatter pseudometric for the alpha depth. Requires A3 (standard) or A4 (alpha).
ExperimentReport run_scatter_rate(const ExperimentConfig &config);

ExperimentReport run_experiment(const ExperimentConfig &config);

std::vector<CellSummary> summarize_cells(const std::vector<ExperimentRecord> &records, double delta,
					 const std::optional<ExperimentConfig> &config = std::nullopt);

enum class SlopeAxis
{
	n,
	epsilon,
};

struct SlopeFit
{
	double slope = 0;
	double intercept = 0;
	double standard_error = 0;
	double lower = 0;  ///< 95% t-interval
	double upper = 0;
	std::size_t points = 0;
};

/// Optional filters fixing the axes not being fitted.
struct SlopeFilter
{
	std::optional<Eigen::Index> n;
	std::optional<Eigen::Index> d;
	std::optional<double> epsilon;
};

/// Least-squares slope of log(median deviation) on log(axis value) over the cells of the
/// report. Needs >= 3 distinct positive axis values and a single value on every other axis.
SlopeFit rate_slope(const ExperimentReport &report, SlopeAxis axis, const SlopeFilter &filter = {});

enum class ReportFormat
{
	csv,
	json,
};

std::string summarize(const ExperimentReport &report, ReportFormat format);

/// Record columns only.
std::vector<ExperimentRecord> parse_records_csv(const std::string &text);
ExperimentReport parse_report_json(const std::string &text);

/// Human-readable cell table.
std::string coverage_table(const ExperimentReport &report);

}  // namespace depthlab
