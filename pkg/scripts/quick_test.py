import logging

from dotenv import load_dotenv

from src.experiments import sweep
from src.order_conditions import check_order
from src.problems import TestProblem
from src.tableaux import get_scheme

load_dotenv()


def quick_test(name: str = "ASI-SSP(4,3,2)"):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    t = get_scheme(name)

    print(f"Testing {t.name}...")
    print("Attained order:", check_order(t).attained_order)
    for problem in ("pareschi", "vanderpol"):
        report = sweep(t, TestProblem.of(problem, "equilibrium"), "0,1e-3,1", "0.1,0.05,0.025,0.0125", t_end=0.5, ref_dt=1.25e-3)
        for e, rates in zip(report.eps, report.rates):
            print(f"{problem:10s} eps={e:<8g} rates x={rates[0]:.2f} y={rates[1]:.2f}")


if __name__ == "__main__":
    quick_test()
