//! Config key reference shown by `qudit <command> --help`.

macro_rules! common {
    () => {
        "\
Config files are JSON objects. Unknown keys are errors. Values can be
overridden with --set key.path=value (value parsed as JSON, else taken as a
string; array elements are addressed by index, e.g. sequence.0.duration_ns).

Shared value types:
  qudit            {\"n_levels\": N, \"transition_freqs_ghz\": [ν1, ...]}
                   default: 4 levels at 2.452, 3.128, 3.799 GHz
  tone             {\"transition\": k (1-based, couples levels k-1 and k),
                    \"rabi_mhz\": Ω, \"detuning_mhz\": δ = ν_k − ν_drive (default 0),
                    \"phase_rad\": φ (default 0)}
  segment          {\"tones\": [tone, ...] (default []), \"duration_ns\": τ}
  grid             either [x0, x1, ...] or {\"start\": a, \"stop\": b, \"step\": s}
  time grid        {\"start_ns\": a, \"stop_ns\": b, \"step_ns\": s}
  cycles           {\"shots\": accepted shots (1000), \"seed\": u64 (0),
                    \"detection_prob\": η in (0, 1] (1),
                    \"quasistatic_detuning_sigma_mhz\": σ (0)}

Exit codes: 0 success, 2 config error, 3 optimisation did not converge,
4 I/O error. Every run writes run_manifest.json into --out."
    };
}

pub const COMMON: &str = common!();

pub const RABI: &str = concat!(
    "\
Config keys (rabi):
  qudit                 qudit (optional)
  transition            1-based transition to drive (required)
  rabi_mhz              Rabi rate Ω, MHz (required)
  detuning_mhz          detuning δ, MHz (default 0)
  phase_rad             tone phase (default 0)
  initial_level         starting level (default: lower level of the transition)
  t_grid                time grid of pulse lengths (required)
  detuning_grid_mhz     grid of δ values; adds rabi_detuning (long format
                        detuning_mhz,t_ns,p_transfer,visibility with
                        visibility = P_ij + P_ji) and rabi_resonance
  amplitude_grid        grid of AWG amplitudes A; adds rabi_power with
                        Ω = κ·A (needs kappa_mhz_per_unit)
  kappa_mhz_per_unit    κ, MHz per unit amplitude

Outputs: rabi_trace (t_ns, p0.., phi0..), plus the optional tables above.
--seed has no effect.",
    "\n\n",
    common!()
);

pub const HADAMARD: &str = concat!(
    "\
Config keys (hadamard):
  qudit                        qudit (optional)
  initial_level                starting level (required)
  target_levels                levels of the equal superposition (required)
  search.bounds.rabi_mhz       [min, max] for every tone, or a list with one
                               [min, max] per transition (default [0.5, 8]);
                               min = max fixes the value
  search.bounds.detuning_mhz   same form (default [-8, 8])
  search.bounds.duration_ns    [min, max] (default [1, 400])
  search.phase_weight          weight of the phase spread in the cost (1);
                               0 asks for equal populations only
  search.grid_points           coarse grid points per free parameter (8)
  search.starts                local searches from the best grid cells (5)
  search.seed                  seed for start jitter (0; set by --seed)
  search.threshold             converged if cost <= threshold (1e-3)
  search.population_tolerance  allowed |P_k − 1/K| for convergence (0.02)
  search.phase_tolerance       allowed circular phase variance (0.05)
  search.max_evals             simplex evaluations per start (4000)
  trace                        time grid for the output trace
                               (default 0..2τ, step 0.5 ns)

Outputs: hadamard_solution.json, hadamard_trace. Exit code 3 if the
search does not converge (outputs are still written).",
    "\n\n",
    common!()
);

pub const GROVER: &str = concat!(
    "\
Config keys (grover):
  qudit                     qudit (optional)
  hadamard.initial_level    Hadamard starting level (required)
  hadamard.target_levels    superposed levels (default [0, 1, 2])
  hadamard.search.*         as for the hadamard command (search.seed is set
                            by --seed)
  searched_level            0-based level to amplify (required)
  options.scan_factor       dense-scan window in half periods (3)
  options.scan_step_ns      dense-scan step (0.1)
  options.phase_lock        re-phase selection tones at the frequency jump (true)
  trace                     time grid of selection lengths for the dynamics
                            (default 0..scan window, step 0.5 ns)
  map.delta1_mhz            grid for the detuning of the lowest selection tone
  map.delta2_mhz            grid for the detuning of the next selection tone
  map.duration_ns           fixed selection length (default: √N/(4Ω))
  map.phase_lock            as options.phase_lock, per pixel (true)
  map.sampling              cycles config; sampled visibilities per pixel
                            instead of exact populations (map.sampling.seed is
                            set by --seed)

Outputs: grover_plan.json, grover_dynamics, and grover_map (one row per δ1,
header row of δ2 values) when map is given. Exit code 3 if the Hadamard
search does not converge.",
    "\n\n",
    common!()
);

pub const SAMPLE: &str = concat!(
    "\
Config keys (sample):
  qudit             qudit (optional)
  sequence          list of segments (default [], i.e. identity)
  initial_levels    rows of the count matrix to fill (default [0]); the row
                    for level i uses seed + i
  cycles            cycles config (cycles.seed is set by --seed)

Outputs: sample_counts (initial, n0..), sample_probabilities
(initial, p0..; empty rows left blank).",
    "\n\n",
    common!()
);

pub const WAVEFORM: &str = concat!(
    "\
Config keys (waveform):
  qudit                       qudit (optional)
  sequence                    list of segments (required)
  awg.sample_rate_gsps        sample rate, GS/s (default 24)
  awg.kappa_mhz_per_unit      κ, Rabi rate per unit amplitude (required)
  output_format               \"f32le\" (default) or \"csv\"

Each tone contributes (Ω/κ)·sin(2π(ν − δ)t + φ) with t measured from the
start of the sequence. Outputs: waveform.f32 (raw little-endian f32) or
waveform.csv (one sample per line). --format and --seed have no effect.",
    "\n\n",
    common!()
);
