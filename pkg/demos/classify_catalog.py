"""Run the associativity checks over every builtin catamorphism."""
from cata import SolverConfig, analysis, catalog


def main():
    cfg, sig = SolverConfig(), catalog.signature()
    for name in catalog.BUILTIN_NAMES:
        cata = catalog.builtin(name)
        r = analysis.classify(cata, cfg, sig)
        print(f"{name:<18} declared={cata.declared_class}")
        for verdict in r.values():
            print(f"    {verdict.line()}")


if __name__ == "__main__":
    main()
