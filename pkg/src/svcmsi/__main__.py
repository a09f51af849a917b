from svcmsi.cli import run

run()
