#!/usr/bin/env python
"""Точка входа для запуска из каталога проекта: python manage.py <command>."""
from wfpc.cli import main

if __name__ == '__main__':
    main()
