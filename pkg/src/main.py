import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, List, Optional

import typer
from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn

from config.config import settings
from src.acceptance import AcceptanceOptions, run_acceptance
from src.experiments import FIGURES, GridMismatchError, run_figure, sweep
from src.integrator import StepError, StepperConfig, StiffLimitError
from src.monotonicity import is_abs_monotonic, radius_r1, ssp_radius_single
from src.order_conditions import NonConvergentFitError, check_order
from src.problems import InitialCondition, ProblemId, TestProblem
from src.services import plotting
from src.stability import SingularAmplificationError, explicit_region, imex_region
from src.tableau import ButcherDoubleTableau, TableauFormatError, explicit_part, format_coefficient, implicit_part
from src.tableaux import (
    ALIASES,
    CATALOG_NAMES,
    FAMILIES,
    ParameterError,
    UnknownSchemeError,
    available_schemes,
    get_scheme,
    instantiate,
    validate,
)
from utils.cli_config import load_run_config, replay_arguments, write_run_config
from utils.ui_helpers import get_output_mode, print_error, print_record, print_table, set_output_mode, write_csv, write_json
from utils.validators import ParameterValidator

APP_NAME = settings.app_name

logger = logging.getLogger(__name__)

# İlerleme çubukları stderr'e yazılır; stdout yalnızca sonuçlar içindir
console = Console(stderr=True)

# Komutların yakalayıp özetlediği hata türleri
HANDLED_ERRORS = (
    UnknownSchemeError,
    ParameterError,
    TableauFormatError,
    StepError,
    StiffLimitError,
    SingularAmplificationError,
    NonConvergentFitError,
    GridMismatchError,
    ValueError,
    OSError,
)


@contextmanager
def _handled():
    """Bilinen hataları yapılandırılmış özet olarak yazdır ve 1 ile çık."""
    try:
        yield
    except HANDLED_ERRORS as e:
        logger.debug(f"Komut başarısız: {type(e).__name__}: {e}")
        print_error(e)
        raise typer.Exit(code=1)


def _resolve_scheme(name: str) -> ButcherDoubleTableau:
    """Katalog adı, takma ad ya da JSON tablo dosyası."""
    if name.endswith(".json") and Path(name).exists():
        return ButcherDoubleTableau.load(name)
    return get_scheme(name)


def _progress() -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        console=console,
    )


# --- Typer CLI Uygulaması ---
app = typer.Typer(help=APP_NAME, no_args_is_help=True)
schemes_app = typer.Typer(help="Şema kataloğu: listele, göster, dışa/içe aktar, aile örnekle", no_args_is_help=True)
app.add_typer(schemes_app, name="schemes")


@app.callback()
def _global_options(
    output: Optional[str] = typer.Option(
        None,
        "--output",
        "-o",
        help="Çıktı formatı: plain | json | rich (varsayılan: plain)",
    ),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG | INFO | WARNING | ERROR"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Rastgele örnekleme tohumu"),
):
    """CLI için genel seçenekler (çıktı modu, günlük seviyesi, tohum)."""
    if output:
        set_output_mode(output)
    level = (log_level or settings.log_level).upper()
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)
    if seed is not None:
        settings.seed = seed


# --- schemes ---

def _aliases_of() -> Dict[str, List[str]]:
    result: Dict[str, List[str]] = {}
    for alias, target in ALIASES.items():
        result.setdefault(target, []).append(alias)
    return result


def _print_tableau(t: ButcherDoubleTableau) -> None:
    report = validate(t)
    if get_output_mode() == "json":
        print_record(t.name, {"tableau": t.to_dict(), "validation": report.to_dict()})
        return
    print_record(t.name, {
        "stages": t.s,
        "design_order": t.design_order,
        "form": "ASI" if t.is_asi else "standard",
        "valid": report.passed,
        "negative_entries": len(report.negative_entries),
    })
    fmt = lambda x: format_coefficient(x, t.decimal)  # noqa: E731
    for label, m, v in (("A", t.A, t.c), ("B", t.B, t.d)):
        rows = [[fmt(v[i])] + [fmt(x) for x in m.row(i)] for i in range(t.s)]
        print_table(label, ["c" if label == "A" else "d"] + [str(j + 1) for j in range(t.s)], rows)
    if not t.is_asi:
        print_table("weights", ["w", "omega"], [[fmt(a), fmt(b)] for a, b in zip(t.w, t.omega)])
    for c in report.checks:
        print(f"{'✓' if c.passed else '✗'} {c.name} {c.detail}".rstrip())
    for n in report.negative_entries:
        print(f"negatif katsayı: {n}")
    for e in report.errata:
        print(f"düzeltme: {e.location}: basılı {e.printed} → kullanılan {e.used} ({e.reason})")


@schemes_app.command("list")
def schemes_list():
    """Katalogdaki ve yerleşik şemaları listele."""
    with _handled():
        aliases = _aliases_of()
        rows = []
        for name in available_schemes():
            t = get_scheme(name)
            rows.append([
                name,
                t.s,
                t.design_order,
                "ASI" if t.is_asi else "standard",
                "catalog" if name in CATALOG_NAMES else "builtin",
                ", ".join(aliases.get(name, [])),
            ])
        print_table("Şemalar", ["name", "stages", "order", "form", "kind", "aliases"], rows)


@schemes_app.command("show")
def schemes_show(name: str = typer.Argument(..., help="Şema adı, takma ad ya da JSON dosyası")):
    """Tablo katsayılarını ve doğrulama raporunu göster."""
    with _handled():
        _print_tableau(_resolve_scheme(name))


@schemes_app.command("export")
def schemes_export(
    name: str = typer.Argument(..., help="Şema adı"),
    out: Path = typer.Option(..., "--out", help="Hedef JSON dosyası"),
):
    """Bir şemayı JSON tablo dosyasına yaz."""
    with _handled():
        path = get_scheme(name).save(out)
        print(f"{name} → {path}")


@schemes_app.command("import")
def schemes_import(path: Path = typer.Argument(..., help="JSON tablo dosyası")):
    """JSON tablosunu oku, doğrula ve raporla."""
    with _handled():
        t = ButcherDoubleTableau.load(path)
        _print_tableau(t)
        if not validate(t).passed:
            raise typer.Exit(code=1)


@schemes_app.command("family")
def schemes_family(
    family: str = typer.Argument(..., help=f"Aile: {', '.join(FAMILIES)}"),
    param: List[str] = typer.Option([], "--param", "-p", help="name=value (tekrarlanabilir)"),
    name: Optional[str] = typer.Option(None, "--name", help="Oluşan tabloya verilecek ad"),
    out: Optional[Path] = typer.Option(None, "--out", help="Tabloyu JSON olarak kaydet"),
):
    """Parametrik aileyi örnekle ve doğrula."""
    with _handled():
        t = instantiate(family, ParameterValidator.parse_pairs(param), name=name)
        _print_tableau(t)
        if out:
            t.save(out)


# --- analiz komutları ---

@app.command("order-check")
def cli_order_check(
    scheme: str = typer.Option(..., "--scheme", "-s", help="Şema adı ya da JSON dosyası"),
    as_json: bool = typer.Option(False, "--json", help="Raporu JSON olarak yazdır"),
    tol: Optional[float] = typer.Option(None, "--tol", help="Artık toleransı"),
):
    """Mertebe koşullarının artıklarını ve ulaşılan mertebeyi raporla."""
    if as_json:
        set_output_mode("json")
    with _handled():
        t = _resolve_scheme(scheme)
        report = check_order(t, tol)
        rows = [
            [r.label, r.order, r.kind, int(r.reduced), r.residual, int(r.passed(report.tol))]
            for r in report.records
        ]
        print_table(f"{t.name}: mertebe koşulları", ["condition", "order", "kind", "reduced", "residual", "passed"], rows, payload=report.to_dict())
        if get_output_mode() != "json":
            print(f"attained order: {report.attained_order} (design {t.design_order}, reduced set {report.reduced_attained_order})")


@app.command("stability")
def cli_stability(
    scheme: str = typer.Option(..., "--scheme", "-s", help="Şema adı ya da JSON dosyası"),
    mode: str = typer.Option("imex", "--mode", "-m", help="explicit | imex"),
    csv_path: Optional[Path] = typer.Option(None, "--csv", help="Izgara CSV'si (re, im, stable)"),
    svg_path: Optional[Path] = typer.Option(None, "--svg", help="Sınır çizimi"),
    resolution: Optional[int] = typer.Option(None, "--resolution", "-r", help="Eksen başına hücre"),
    window: Optional[str] = typer.Option(None, "--window", help="re_min,re_max,im_min,im_max"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Paralel işçi sayısı"),
):
    """Kararlılık bölgesi alanı, eksen aralığı ve isteğe bağlı CSV/SVG."""
    with _handled():
        if mode not in ("explicit", "imex"):
            raise ValueError(f"Geçersiz mod: {mode!r} (explicit | imex)")
        t = _resolve_scheme(scheme)
        win = ParameterValidator.parse_window(window) if window else None
        workers = workers or settings.workers
        if mode == "explicit":
            region = explicit_region(t, win, resolution, workers)
        else:
            region = imex_region(t, win, resolution, workers=workers)
        print_record(f"{t.name} ({mode})", region.to_dict())
        if csv_path:
            write_csv(csv_path, ["re", "im", "stable"], region.rows())
        if svg_path:
            explicit_lines = None
            if mode == "imex":
                explicit_lines = explicit_region(t, region.window, region.resolution, workers).boundary
            plotting.region_svg(svg_path, f"{t.name} ({mode})", region.window, region.boundary, explicit_lines)
        written = [p for p in (csv_path, svg_path) if p]
        if written:
            write_run_config(
                Path(written[0]).parent, "stability", scheme=scheme, mode=mode, resolution=region.resolution,
                window=list(region.window), csv_path=csv_path, svg_path=svg_path,
            )


@app.command("monotonicity")
def cli_monotonicity(
    scheme: str = typer.Option(..., "--scheme", "-s", help="Şema adı ya da JSON dosyası"),
    r2: float = typer.Option(0.0, "--r2", help="Sabit r₂ değeri"),
    r_max: Optional[float] = typer.Option(None, "--r-max", help="Arama üst sınırı"),
    r1: Optional[float] = typer.Option(None, "--r1", help="Yalnızca (r₁, r₂) noktasını kontrol et"),
    out: Optional[Path] = typer.Option(None, "--out", help="Sonuç JSON'u için klasör"),
):
    """r₁ yarıçapı (sabit r₂) ve açık kısmın SSP yarıçapı."""
    with _handled():
        t = _resolve_scheme(scheme)
        if r1 is not None:
            point = is_abs_monotonic(t, r1, r2)
            print_record(f"{t.name} @ ({r1}, {r2})", point.to_dict())
            return
        radius = radius_r1(t, r2=r2, r_max=r_max)
        explicit = ssp_radius_single(explicit_part(t), r_max=r_max)
        implicit = ssp_radius_single(implicit_part(t), r_max=r_max)
        record = {**radius.to_dict(), "explicit_ssp_radius": explicit.radius, "implicit_ssp_radius": implicit.radius}
        print_record(f"{t.name}: mutlak monotonluk", record)
        if out:
            write_json(Path(out) / "monotonicity.json", record)
            write_run_config(out, "monotonicity", scheme=scheme, r2=r2, r_max=r_max or settings.radius_r_max)


@app.command("converge")
def cli_converge(
    scheme: str = typer.Option(..., "--scheme", "-s", help="Şema adı ya da JSON dosyası"),
    problem: ProblemId = typer.Option(ProblemId.PARESCHI, "--problem", "-p", help="Test problemi"),
    ic: InitialCondition = typer.Option(InitialCondition.EQUILIBRIUM, "--ic", help="Başlangıç verisi"),
    eps_grid: Optional[str] = typer.Option(None, "--eps-grid", help="ε ızgarası, ör. 0+logspace:1e-8:1:5"),
    dt_grid: Optional[str] = typer.Option(None, "--dt-grid", help="Δt ızgarası, ör. logspace:1e-4:1:10"),
    t_end: Optional[float] = typer.Option(None, "--t-end", help="Bitiş zamanı"),
    ref_dt: Optional[float] = typer.Option(None, "--ref-dt", help="Referans adım"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Paralel işçi sayısı"),
    out: Path = typer.Option(..., "--out", help="Çıktı klasörü"),
):
    """Hata yüzeyi ve ε başına yakınsama hızları."""
    with _handled():
        t = _resolve_scheme(scheme)
        test_problem = TestProblem.of(problem, ic)
        report = sweep(t, test_problem, eps_grid, dt_grid, t_end, StepperConfig.from_settings(), ref_dt, workers)
        out = Path(out)
        report.write_surface_csv(out / "surface.csv")
        report.write_rates_csv(out / "rates.csv")
        write_json(out / "report.json", report.to_dict())
        write_run_config(
            out, "converge", scheme=scheme, problem=test_problem.problem.value, ic=test_problem.ic.value,
            eps_grid=eps_grid or settings.eps_grid, dt_grid=dt_grid or settings.dt_grid,
            t_end=report.t_end, ref_dt=report.ref_dt,
        )
        rows = [
            [e, *report.rates[i], *[int(w) for w in report.well_defined[i]]]
            for i, e in enumerate(report.eps)
        ]
        print_table(f"{t.name}, {test_problem.label}", ["eps", "rate_x", "rate_y", "well_defined_x", "well_defined_y"], rows, payload=report.to_dict())
        if report.failures:
            print_table("Başarısız hücreler", ["eps", "dt", "error", "message"], [[f.eps, f.dt, f.error, f.message] for f in report.failures])
            raise typer.Exit(code=1)


@app.command("figure")
def cli_figure(
    figure: str = typer.Argument(..., help=f"Şekil: {', '.join(FIGURES)}"),
    scheme: List[str] = typer.Option([], "--scheme", "-s", help="Şema (tekrarlanabilir)"),
    eps_grid: Optional[str] = typer.Option(None, "--eps-grid"),
    dt_grid: Optional[str] = typer.Option(None, "--dt-grid"),
    t_end: Optional[float] = typer.Option(None, "--t-end"),
    ref_dt: Optional[float] = typer.Option(None, "--ref-dt"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w"),
    out: Path = typer.Option(..., "--out", help="Çıktı klasörü"),
):
    """Bir yakınsama şeklini CSV ve SVG olarak üret."""
    with _handled():
        files = run_figure(
            figure, out, scheme or None, eps_grid, dt_grid, t_end, ref_dt, StepperConfig.from_settings(), workers
        )
        files.append(write_run_config(
            out, "figure", figure=figure, scheme=scheme or None,
            eps_grid=eps_grid or settings.eps_grid, dt_grid=dt_grid or settings.dt_grid, t_end=t_end, ref_dt=ref_dt,
        ))
        print_table(f"{figure}: dosyalar", ["file"], [[str(f)] for f in files])


@app.command("reproduce-all")
def cli_reproduce_all(
    out: Path = typer.Option(Path(settings.output_dir), "--out", help="Çıktı klasörü"),
    quick: bool = typer.Option(False, "--quick", help="Düşük çözünürlük ve kaba referans adımı"),
    skip_convergence: bool = typer.Option(False, "--skip-convergence", help="Yakınsama kriterlerini (10, 11) atla"),
):
    """Kabul kontrollerini çalıştır ve geçti/kaldı tablosunu yazdır."""
    with _handled():
        opts = AcceptanceOptions.from_settings(quick)
        if get_output_mode() == "rich":
            with _progress() as progress:
                task = progress.add_task("kabul kontrolleri", total=None)
                report = run_acceptance(opts, not skip_convergence, lambda label: progress.update(task, description=label, advance=1))
        else:
            report = run_acceptance(opts, not skip_convergence)
        report.write(out)
        write_run_config(out, "reproduce-all", quick=quick, skip_convergence=skip_convergence, **opts.to_dict())
        rows = [[c.criterion, c.name, c.expected, c.observed, "PASS" if c.passed else "FAIL", c.note] for c in report.checks]
        print_table("Kabul kontrolleri", ["#", "check", "expected", "observed", "result", "note"], rows, payload=report.to_dict())
        if get_output_mode() != "json":
            print(f"{len(rows) - len(report.failed)}/{len(rows)} passed")
        if not report.passed:
            raise typer.Exit(code=1)


@app.command("replay")
def cli_replay(
    config_path: Path = typer.Argument(..., help="run-config.json dosyası ya da onu içeren klasör"),
    out: Optional[Path] = typer.Option(None, "--out", help="Çıktı klasörü (varsayılan: kayıttaki klasör)"),
):
    """Bir run-config.json kaydındaki komutu aynı girdilerle yeniden çalıştır."""
    with _handled():
        config = load_run_config(config_path)
        commands = typer.main.get_command(app).commands
        if config.subcommand not in commands or config.subcommand in ("replay", "schemes"):
            raise ValueError(f"Yeniden çalıştırılamayan komut: {config.subcommand!r}")
        command = commands[config.subcommand]
        config.apply_settings(settings)
        argv = replay_arguments(command, config, out)
        logger.info(f"Yeniden çalıştırılıyor: {config.subcommand} {' '.join(argv)}")
    with command.make_context(config.subcommand, argv) as ctx:
        command.invoke(ctx)


if __name__ == "__main__":
    app()
