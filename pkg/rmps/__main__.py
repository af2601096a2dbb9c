"""Entry point: ``python -m rmps <bench|convex|complete|list> ...``."""
import os
import sys


def main():
    """Run the ``rmps`` management command with the process arguments."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed?"
        ) from exc
    execute_from_command_line([sys.argv[0], 'rmps', *sys.argv[1:]])


if __name__ == '__main__':
    main()
