def pytest_runtest_logreport(report):
    # The acceptance tests print their own PASS lines with timing; make
    # failures equally visible as one line per criterion.
    if "test_acceptance" in report.nodeid and report.failed and report.when == "call":
        print(f"\nACCEPTANCE FAIL: {report.nodeid.split('::', 1)[1]}")
