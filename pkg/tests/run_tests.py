#!/usr/bin/env python3
"""
WaveSheet Test Runner

Runs all tests for the WaveSheet simulator.
"""

import sys
import importlib
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

# (name, module, label, emoji); the slow suites come last
TEST_SUITES = [
    ("spectral", "tests.test_spectral", "Spectral Operator Tests", "🎼"),
    ("geometry", "tests.test_geometry", "Geometry Tests", "📐"),
    ("kernels", "tests.test_kernels", "Kernel Tests", "🧮"),
    ("velocity", "tests.test_velocity", "Velocity Tests", "💨"),
    ("fredholm", "tests.test_fredholm", "Fredholm System Tests", "🔗"),
    ("evolution", "tests.test_evolution", "Time Integration Tests", "⏱️"),
    ("damping", "tests.test_damping", "Damping Tests", "🧽"),
    ("diagnostics", "tests.test_diagnostics", "Diagnostics Tests", "📊"),
    ("cli", "tests.test_cli_io", "Configuration and CLI Tests", "🔧"),
    ("pipeline", "tests.test_pipeline", "Pipeline Tests", "🔄"),
    ("acceptance", "tests.test_acceptance", "Self-Test Suite Tests", "✔️"),
]


def _run_module(module_name):
    module = importlib.import_module(module_name)
    return module.main() is not False


def run_all_tests():
    """Run all test suites"""
    print("🧪 WaveSheet - Running All Tests")
    print("=" * 50)

    success_count = 0
    total_tests = 0

    for number, (_, module_name, label, emoji) in enumerate(TEST_SUITES, start=1):
        print(f"\n{number}. {emoji} Running {label}...")
        try:
            if _run_module(module_name):
                print(f"✅ {label} passed")
                success_count += 1
            else:
                print(f"⚠️  {label} completed with issues")
        except Exception as e:
            print(f"❌ {label} failed: {e}")
        total_tests += 1

    # Summary
    print(f"\n🎯 Test Results Summary:")
    print(f"   Passed: {success_count}/{total_tests}")
    print(f"   Success Rate: {(success_count/total_tests)*100:.1f}%")

    if success_count == total_tests:
        print("\n🎉 All tests passed! WaveSheet is ready for use.")
        return True
    else:
        print(f"\n⚠️  {total_tests - success_count} test(s) failed. Please check the errors above.")
        return False


def run_specific_test(test_name):
    """Run a specific test by name"""
    print(f"🧪 Running {test_name} test...")

    modules = {name: module_name for name, module_name, _, _ in TEST_SUITES}
    if test_name in modules:
        _run_module(modules[test_name])
    elif test_name == "performance":
        from tests.focused_performance_test import main as run_performance_test
        run_performance_test()
    else:
        print(f"❌ Unknown test: {test_name}")
        print(f"Available tests: {', '.join(modules)}, performance")
        return False

    print(f"✅ {test_name} test completed")
    return True


if __name__ == "__main__":
    if len(sys.argv) > 1:
        # Run specific test
        test_name = sys.argv[1].lower()
        success = run_specific_test(test_name)
    else:
        # Run all tests
        success = run_all_tests()

    sys.exit(0 if success else 1)
