import os

from django.conf import settings


class TestRequirements:

    def test_requirements(self):
        try:
            with open(f'{os.path.join(settings.BASE_DIR, "requirements.txt")}', 'r') as f:
                requirements = f.read().lower()
        except FileNotFoundError:
            assert False, 'Проверьте, что добавили файл requirements.txt'

        for package in (
            'django', 'djangorestframework', 'python-dotenv',
            'numpy', 'scipy', 'pytest-django',
        ):
            assert package in requirements, (
                f'Проверьте, что добавили {package} в файл requirements.txt'
            )
