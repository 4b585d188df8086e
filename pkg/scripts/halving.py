"""Reader identifications and time, SPI exchange vs dual-side scanning, across panel sizes."""

from ondr.harness import LinkConfig, PanelConfig, ProtocolSettings, ScenarioConfig, run_scenario

print(f"{'pairs':>5} {'spi_ids':>8} {'dual_ids':>8} {'spi_p50':>8} {'dual_p50':>9} {'ratio':>6}")
for n in (1, 5, 10, 20, 30, 45, 60):
    rows = -(-2 * n // 10)
    base = ScenarioConfig(pairs=n, trials=50, link=LinkConfig(p_base=0.0),
                          protocol=ProtocolSettings(time_budget=10.0),
                          panel=PanelConfig(width=4.2, height=0.467 * rows, cols=10, rows=rows))
    spi = run_scenario(base.replace(mode="spi_verify"))
    dual = run_scenario(base.replace(mode="baseline"))
    a, b = spi.quantile(0.5), dual.quantile(0.5)
    print(f"{n:5d} {max(spi.identification_counts):8d} {max(dual.identification_counts):8d} "
          f"{a:8.4f} {b:9.4f} {b / a:6.2f}")
