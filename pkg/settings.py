# Overrides of ltlstep.solver.SolverConfig defaults for all solver runs
SOLVER_SETTINGS = {
    # "threads": 4,
    # "time_limit": 600,
}

# Run the long end-to-end tests on the scenario corpus (several minutes)
IS_SLOW_TESTS_ENABLED = False
